//! A small recognizer for the DOT subset the exporter emits: one digraph,
//! attribute statements, node and edge statements, anonymous subgraphs.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Sym(char),
    Arrow,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if "{}[];,=".contains(c) {
            out.push(Tok::Sym(c));
            chars.next();
        } else if c == '-' {
            chars.next();
            match chars.next() {
                Some('>') => out.push(Tok::Arrow),
                other => return Err(format!("expected '->', got '-{other:?}'")),
            }
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('\\') => {
                        s.push('\\');
                        s.push(chars.next().ok_or("unterminated escape")?);
                    }
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => return Err("unterminated string".into()),
                }
            }
            out.push(Tok::Id(s));
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '.' {
                    s.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Id(s));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    edges: usize,
    nodes: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, c: char) -> Result<(), String> {
        match self.next()? {
            Tok::Sym(s) if s == c => Ok(()),
            t => Err(format!("expected {c:?}, got {t:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next()? {
            Tok::Id(s) => Ok(s),
            t => Err(format!("expected identifier, got {t:?}")),
        }
    }

    fn attr_list(&mut self) -> Result<(), String> {
        self.sym('[')?;
        while self.peek() != Some(&Tok::Sym(']')) {
            self.id()?;
            self.sym('=')?;
            self.id()?;
            if matches!(self.peek(), Some(Tok::Sym(',' | ';'))) {
                self.pos += 1;
            }
        }
        self.sym(']')
    }

    fn stmt_list(&mut self, top: bool) -> Result<(), String> {
        while self.peek() != Some(&Tok::Sym('}')) {
            match self.peek() {
                Some(Tok::Sym('{')) => {
                    self.pos += 1;
                    self.stmt_list(false)?;
                    self.sym('}')?;
                }
                Some(Tok::Id(_)) => {
                    let first = self.id()?;
                    match self.peek() {
                        Some(Tok::Sym('=')) => {
                            self.pos += 1;
                            self.id()?;
                        }
                        Some(Tok::Arrow) => {
                            while self.peek() == Some(&Tok::Arrow) {
                                self.pos += 1;
                                self.id()?;
                                self.edges += 1;
                            }
                            if self.peek() == Some(&Tok::Sym('[')) {
                                self.attr_list()?;
                            }
                        }
                        _ => {
                            if self.peek() == Some(&Tok::Sym('[')) {
                                self.attr_list()?;
                            }
                            if top && !["node", "edge", "graph"].contains(&first.as_str()) {
                                self.nodes += 1;
                            }
                        }
                    }
                }
                other => return Err(format!("unexpected token {other:?}")),
            }
            if self.peek() == Some(&Tok::Sym(';')) {
                self.pos += 1;
            }
        }
        Ok(())
    }
}

/// Parses `src` and returns (node statements, edges).
pub fn check(src: &str) -> Result<(usize, usize), String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        edges: 0,
        nodes: 0,
    };
    if p.id()? != "digraph" {
        return Err("expected digraph".into());
    }
    if matches!(p.peek(), Some(Tok::Id(_))) {
        p.pos += 1;
    }
    p.sym('{')?;
    p.stmt_list(true)?;
    p.sym('}')?;
    if p.pos != p.toks.len() {
        return Err("trailing tokens".into());
    }
    Ok((p.nodes, p.edges))
}
