use super::ast::{By, Intention, ModelCall, Statement, Verb};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::models::Param;
use crate::query::{AggFn, Aggregate, CubeQuery};
use crate::selection::{Atom, CmpOp, Condition, LevelRef};

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            message: format!("unexpected {}", t.tok.describe()),
            line: t.line,
            column: t.column,
            offset: t.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn error_here(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            message,
            line: t.line,
            column: t.column,
            offset: t.offset,
            expected: Vec::new(),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(k) if k == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{s}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident { text, .. } => {
                let t = text.clone();
                self.bump();
                Ok(t)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn positive_int(&mut self) -> PResult<u32> {
        match self.peek() {
            Tok::Number(n) => match n.parse::<u32>() {
                Ok(v) if v > 0 => {
                    self.bump();
                    Ok(v)
                }
                _ => Err(self.error_here(format!("expected a positive integer, found {n}"))),
            },
            _ => Err(self.error(&["positive integer"])),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        self.eat_sym(";");
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    fn level_ref(&mut self) -> PResult<LevelRef> {
        let dimension = self.ident("dimension name")?;
        self.expect_sym(".")?;
        let level = match self.peek() {
            // `ALL` is a level name, never a keyword.
            Tok::Ident { .. } => self.ident("level name")?,
            _ => return Err(self.error(&["level name"])),
        };
        Ok(LevelRef { dimension, level })
    }

    fn level_list(&mut self) -> PResult<Vec<LevelRef>> {
        let mut out = vec![self.level_ref()?];
        while self.eat_sym(",") {
            out.push(self.level_ref()?);
        }
        Ok(out)
    }

    fn id_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.eat_sym(",") {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    // cond := and_cond {"or" and_cond}
    fn condition(&mut self) -> PResult<Condition> {
        let mut c = self.and_condition()?;
        while self.eat_kw("or") {
            c = Condition::Or(Box::new(c), Box::new(self.and_condition()?));
        }
        Ok(c)
    }

    fn and_condition(&mut self) -> PResult<Condition> {
        let mut c = self.not_condition()?;
        while self.eat_kw("and") {
            c = Condition::And(Box::new(c), Box::new(self.not_condition()?));
        }
        Ok(c)
    }

    fn not_condition(&mut self) -> PResult<Condition> {
        if self.eat_kw("not") {
            return Ok(Condition::Not(Box::new(self.not_condition()?)));
        }
        if self.eat_kw("true") {
            return Ok(Condition::True);
        }
        if self.eat_kw("false") {
            return Ok(Condition::False);
        }
        if self.eat_sym("(") {
            let c = self.condition()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if !matches!(self.peek(), Tok::Ident { .. }) {
            return Err(self.error(&["condition"]));
        }
        let level = self.level_ref()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.error(&["comparison operator"])),
        };
        self.bump();
        let value = match self.peek() {
            Tok::Str(s) | Tok::Number(s) => s.clone(),
            _ => return Err(self.error(&["quoted member", "number"])),
        };
        self.bump();
        Ok(Condition::Atom(Atom { level, op, value }))
    }

    fn opt_filter(&mut self) -> PResult<Option<Condition>> {
        if self.eat_kw("for") {
            Ok(Some(self.condition()?))
        } else {
            Ok(None)
        }
    }

    fn model_call(&mut self) -> PResult<ModelCall> {
        let name = self.ident("model name")?;
        self.expect_sym("(")?;
        let mut args = Vec::new();
        let mut params = Vec::new();
        if !self.at_sym(")") {
            loop {
                if matches!(self.peek_at(1), Tok::Sym("=")) {
                    let key = self.ident("parameter name")?;
                    self.expect_sym("=")?;
                    let value = match self.peek() {
                        Tok::Number(n) => Param::Num(
                            n.parse().map_err(|_| self.error_here(format!("invalid number {n}")))?,
                        ),
                        Tok::Str(s) => Param::Str(s.clone()),
                        _ => return Err(self.error(&["number", "quoted string"])),
                    };
                    self.bump();
                    params.push((key, value));
                } else {
                    if !params.is_empty() {
                        return Err(self.error_here("attributes must precede named parameters".into()));
                    }
                    let mut path = self.ident("attribute")?;
                    while self.eat_sym(".") {
                        path.push('.');
                        path.push_str(&self.ident("attribute")?);
                    }
                    args.push(path);
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(ModelCall { name, args, params })
    }

    fn intention(&mut self) -> PResult<Intention> {
        self.expect_kw("with")?;
        let cube = self.ident("cube name")?;
        let verb = match self.peek() {
            Tok::Keyword(k) if k == "describe" => {
                self.bump();
                let measures = self.id_list("measure")?;
                let filter = self.opt_filter()?;
                let by = if self.eat_kw("by") {
                    if self.eat_kw("size") {
                        Some(By::Size(self.positive_int()?))
                    } else {
                        Some(By::Levels(self.level_list()?))
                    }
                } else {
                    None
                };
                Verb::Describe { measures, filter, by }
            }
            Tok::Keyword(k) if k == "assess" => {
                self.bump();
                let measures = self.id_list("measure")?;
                let filter = self.opt_filter()?;
                self.expect_kw("using")?;
                let benchmarks = self.id_list("benchmark")?;
                Verb::Assess { measures, filter, benchmarks }
            }
            Tok::Keyword(k) if k == "explain" => {
                self.bump();
                let measure = self.ident("measure")?;
                let filter = self.opt_filter()?;
                self.expect_kw("using")?;
                let mut models = vec![self.model_call()?];
                while self.eat_sym(",") {
                    models.push(self.model_call()?);
                }
                let against = if self.eat_kw("against") { Some(self.ident("cube name")?) } else { None };
                Verb::Explain { measure, filter, models, against }
            }
            Tok::Keyword(k) if k == "predict" => {
                self.bump();
                self.expect_kw("next")?;
                let k = self.positive_int()?;
                self.expect_kw("points")?;
                self.expect_kw("of")?;
                let measure = self.ident("measure")?;
                let filter = self.opt_filter()?;
                self.expect_kw("over")?;
                let over = self.ident("time dimension")?;
                self.expect_kw("using")?;
                let model = self.ident("predictive model")?;
                Verb::Predict { k, measure, filter, over, model }
            }
            Tok::Keyword(k) if k == "suggest" => {
                self.bump();
                let model = if self.eat_kw("using") { Some(self.ident("recommendation model")?) } else { None };
                Verb::Suggest { model }
            }
            Tok::Ident { text, quoted: false } => {
                return Err(self.error_here(format!("unknown verb `{text}`")));
            }
            _ => return Err(self.error(&["`describe`", "`assess`", "`explain`", "`predict`", "`suggest`"])),
        };
        Ok(Intention { cube, verb })
    }

    fn cube_query(&mut self) -> PResult<CubeQuery> {
        self.expect_kw("cube")?;
        let base = self.ident("cube name")?;
        let selection = if self.eat_kw("where") { self.condition()? } else { Condition::True };
        let group = if self.eat_kw("group") {
            self.eat_kw("by");
            self.level_list()?
        } else {
            Vec::new()
        };
        self.expect_kw("agg")?;
        let mut aggregates = Vec::new();
        loop {
            let fname = match self.peek() {
                Tok::Ident { text, quoted: false } => text.clone(),
                _ => return Err(self.error(&["aggregate function"])),
            };
            let func = AggFn::from_name(&fname)
                .ok_or_else(|| self.error_here(format!("unknown aggregate function `{fname}`")))?;
            self.bump();
            self.expect_sym("(")?;
            let measure = self.ident("measure")?;
            self.expect_sym(")")?;
            aggregates.push(Aggregate { func, measure });
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(CubeQuery { base, selection, group, aggregates })
    }
}

pub fn parse_intention(src: &str) -> Result<Intention, ParseError> {
    let mut p = Parser::new(src)?;
    let i = p.intention()?;
    p.finish()?;
    Ok(i)
}

pub fn parse_cube_query(src: &str) -> Result<CubeQuery, ParseError> {
    let mut p = Parser::new(src)?;
    let q = p.cube_query()?;
    p.finish()?;
    Ok(q)
}

/// An intention (starting with `with`) or a cube query (starting with `cube`).
pub fn parse_statement(src: &str) -> Result<Statement, ParseError> {
    let mut p = Parser::new(src)?;
    let s = if p.at_kw("cube") {
        Statement::Query(p.cube_query()?)
    } else if p.at_kw("with") {
        Statement::Intention(p.intention()?)
    } else {
        return Err(p.error(&["`with`", "`cube`"]));
    };
    p.finish()?;
    Ok(s)
}
