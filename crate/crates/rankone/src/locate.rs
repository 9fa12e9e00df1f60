//! Maps JSON value paths such as `analyses[2].pairs.stage` to the line on
//! which the value starts, for diagnostics.

use std::collections::HashMap;

#[derive(Debug, Default, Clone)]
pub struct LineIndex {
    lines: HashMap<String, usize>,
}

impl LineIndex {
    /// Scans `text`, which must already be valid JSON.
    pub fn new(text: &str) -> Self {
        let mut scanner = Scanner {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            lines: HashMap::new(),
        };
        scanner.value(String::new());
        LineIndex { lines: scanner.lines }
    }

    /// Line of `path`, or of its nearest recorded ancestor.
    pub fn line(&self, path: &str) -> Option<usize> {
        let mut p = path;
        loop {
            if let Some(&l) = self.lines.get(p) {
                return Some(l);
            }
            let cut = p.rfind(['.', '['])?;
            p = &p[..cut];
        }
    }
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    lines: HashMap<String, usize>,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
        }
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
    }

    fn string(&mut self) -> String {
        self.bump();
        let start = self.pos;
        while let Some(b) = self.bump() {
            match b {
                b'\\' => {
                    self.bump();
                }
                b'"' => break,
                _ => {}
            }
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos.saturating_sub(1)]).into_owned()
    }

    fn value(&mut self, path: String) {
        self.skip_ws();
        self.lines.entry(path.clone()).or_insert(self.line);
        match self.peek() {
            Some(b'{') => {
                self.bump();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b'}') | None => {
                            self.bump();
                            return;
                        }
                        Some(b',') => {
                            self.bump();
                        }
                        Some(b'"') => {
                            let key_line = self.line;
                            let key = self.string();
                            let child = if path.is_empty() { key } else { format!("{path}.{key}") };
                            self.lines.insert(child.clone(), key_line);
                            self.skip_ws();
                            self.bump();
                            self.value(child);
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
            }
            Some(b'[') => {
                self.bump();
                let mut i = 0;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b']') | None => {
                            self.bump();
                            return;
                        }
                        Some(b',') => {
                            self.bump();
                        }
                        _ => {
                            self.value(format!("{path}[{i}]"));
                            i += 1;
                        }
                    }
                }
            }
            Some(b'"') => {
                self.string();
            }
            _ => {
                while matches!(self.peek(), Some(b) if !matches!(b, b',' | b'}' | b']' | b' ' | b'\n' | b'\t' | b'\r')) {
                    self.bump();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_nested_keys() {
        let text = "{\n  \"depth\": 3,\n  \"analyses\": [\n    {\"kind\": \"fit\",\n     \"pairs\": {\"stage\": 9}}\n  ]\n}";
        let idx = LineIndex::new(text);
        assert_eq!(idx.line("depth"), Some(2));
        assert_eq!(idx.line("analyses[0]"), Some(4));
        assert_eq!(idx.line("analyses[0].pairs.stage"), Some(5));
        assert_eq!(idx.line("analyses[0].pairs.cap"), Some(5));
        assert_eq!(idx.line("nothing"), None);
    }

    #[test]
    fn strings_with_brackets_do_not_confuse_the_scan() {
        let text = "{\"a\": \"[{,\\\"}\",\n\"b\": [1, [2, 3]]}";
        let idx = LineIndex::new(text);
        assert_eq!(idx.line("b[1][0]"), Some(2));
    }
}
