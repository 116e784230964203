//! Recursive-descent parser for expressions and statements.

use super::ast::{BinOp, Node, Tree};
use super::lexer::{Tok, Token};
use super::{Block, Item, ParseError, SourceSpan, Statement};

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn is_punct(&self, c: char) -> bool {
        *self.peek() == Tok::Punct(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<SourceSpan, ParseError> {
        if self.is_punct(c) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        };
        ParseError::new(format!("expected {wanted}, found {found}"), self.span())
    }

    pub fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn spanned(&self, start: SourceSpan, node: Node) -> Tree {
        Tree::new(node, start.to(self.prev_end()))
    }

    pub fn expression(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = self.spanned(start, Node::Binary(op, Box::new(lhs), Box::new(rhs)));
        }
    }

    fn term(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = self.spanned(start, Node::Binary(op, Box::new(lhs), Box::new(rhs)));
        }
    }

    fn unary(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(self.spanned(start, Node::Neg(Box::new(inner))));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        let base = self.postfix()?;
        if self.eat('^') {
            let exp_start = self.span();
            let exponent = if self.eat('-') {
                let inner = self.postfix()?;
                self.spanned(exp_start, Node::Neg(Box::new(inner)))
            } else {
                self.postfix()?
            };
            return Ok(self.spanned(start, Node::Power(Box::new(base), Box::new(exponent))));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        let mut e = self.primary()?;
        while self.eat('@') {
            if matches!(self.peek(), Tok::Ident(s) if s == "shift") {
                self.bump();
            }
            self.expect('(')?;
            let args = self.list(')')?;
            e = self.spanned(start, Node::At(Box::new(e), args));
        }
        Ok(e)
    }

    fn list(&mut self, close: char) -> Result<Vec<Tree>, ParseError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expression()?);
            if self.eat(close) {
                return Ok(out);
            }
            if !self.eat(',') {
                return Err(self.unexpected(&format!("`,` or `{close}`")));
            }
        }
    }

    fn primary(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(self.spanned(start, Node::Number(n)))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "D" && self.eat('[') {
                    let f = self.expression()?;
                    let mut axes = Vec::new();
                    while self.eat(',') {
                        axes.push(self.ident()?);
                    }
                    self.expect(']')?;
                    if axes.is_empty() {
                        return Err(ParseError::new("`D[...]` needs at least one axis", start.to(self.prev_end())));
                    }
                    return Ok(self.spanned(start, Node::Deriv(Box::new(f), axes)));
                }
                if self.eat('(') {
                    let args = self.list(')')?;
                    return Ok(self.spanned(start, Node::Call(name, args)));
                }
                Ok(self.spanned(start, Node::Ident(name)))
            }
            Tok::Punct('(') => {
                self.bump();
                let inner = self.expression()?;
                self.expect(')')?;
                Ok(Tree::new(inner.node, start.to(self.prev_end())))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    /// An expression optionally followed by `= expression`.
    fn value(&mut self) -> Result<Tree, ParseError> {
        let start = self.span();
        let lhs = self.expression()?;
        if self.eat('=') {
            let rhs = self.expression()?;
            return Ok(self.spanned(start, Node::Equation(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn values(&mut self) -> Result<Vec<Tree>, ParseError> {
        let mut out = Vec::new();
        if self.is_punct(';') {
            return Ok(out);
        }
        loop {
            if let Tok::Str(s) = self.peek().clone() {
                let sp = self.bump().span;
                out.push(Tree::new(Node::Str(s), sp));
            } else {
                out.push(self.value()?);
            }
            if !self.eat(',') {
                return Ok(out);
            }
        }
    }

    fn label(&mut self) -> Option<(String, SourceSpan)> {
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Ident(s), Tok::Punct(':')) | (Tok::Str(s), Tok::Punct(':')) => {
                let sp = self.bump().span;
                self.bump();
                Some((s, sp))
            }
            _ => None,
        }
    }

    /// `key [label] [:] values ;`
    fn item(&mut self) -> Result<Item, ParseError> {
        let (key, key_span) = self.ident()?;
        let label = if self.eat(':') { None } else { self.label() };
        let values = self.values()?;
        self.expect(';')?;
        Ok(Item { key, label, values, span: key_span.to(self.prev_end()) })
    }

    pub fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.span();
        let (key, _) = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return Err(self.unexpected("a statement")),
        };
        match key.as_str() {
            "vars" | "deps" => {
                let mut names = vec![self.ident()?];
                while self.eat(',') {
                    names.push(self.ident()?);
                }
                let mut complex = false;
                if matches!(self.peek(), Tok::Ident(s) if s == "complex") {
                    self.bump();
                    complex = true;
                }
                self.expect(';')?;
                let span = start.to(self.prev_end());
                Ok(if key == "vars" {
                    Statement::Vars(names, span)
                } else {
                    Statement::Deps(names, complex, span)
                })
            }
            "solve" => {
                let jet = self.expression()?;
                match self.ident()? {
                    (kw, _) if kw == "from" => {}
                    (_, sp) => return Err(ParseError::new("expected `from`", sp)),
                }
                let eq = self.ident()?;
                self.expect(';')?;
                Ok(Statement::Solve { jet, equation: eq, span: start.to(self.prev_end()) })
            }
            _ => {
                // block: key [name] {
                let name = match (self.peek().clone(), self.peek_at(1).clone()) {
                    (Tok::Punct('{'), _) => Some(None),
                    (Tok::Ident(s), Tok::Punct('{')) | (Tok::Str(s), Tok::Punct('{')) => {
                        self.bump();
                        Some(Some(s))
                    }
                    _ => None,
                };
                if let Some(name) = name {
                    self.expect('{')?;
                    let mut items = Vec::new();
                    while !self.eat('}') {
                        if self.at_eof() {
                            return Err(self.unexpected("`}`"));
                        }
                        items.push(self.item()?);
                    }
                    self.eat(';');
                    return Ok(Statement::Block(Block { kind: key, name, items, span: start.to(self.prev_end()) }));
                }
                self.pos -= 1;
                Ok(Statement::Item(self.item()?))
            }
        }
    }
}
