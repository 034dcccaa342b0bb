//! Line-oriented job files: one file declares a ring tower, named constants,
//! a knot-group presentation with matrices, and a task list. A single
//! expression grammar serves minimal polynomials, constants, matrix entries,
//! and residual images.

use crate::error::JobError;
use crate::mat::Mat;
use crate::rep::{rep_from_assignment, Representation};
use crate::ring::{Elem, Ring, RingRc};
use crate::words::{winv, wmul, wreduce, Presentation, Word};

const RESERVED: &[&str] = &[
    "ring", "extend", "series", "let", "generators", "relator", "meridian", "longitude",
    "matrix", "task", "precision", "sqrt", "root", "t",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Name(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
    Sqrt(Box<Expr>, Box<Expr>),
    Root { var: String, poly: Box<Expr>, seed: Box<Expr> },
}

#[derive(Clone, Debug)]
pub enum RingDecl {
    Rationals,
    PrimeField(u64),
    Padic { p: u64, prec: u32 },
}

#[derive(Clone, Debug)]
pub enum ModeDecl {
    Meridian,
    Longitude,
    Porti { t_mu: String, t_lambda: String },
    Word(Word),
}

#[derive(Clone, Debug)]
pub enum TaskDecl {
    Selmer(ModeDecl),
    TwoVariable,
    Conjecture,
    Residual { p: u64, images: Vec<(String, Expr)> },
    Irreducibility { p: u64, images: Vec<(String, Expr)> },
}

#[derive(Clone, Debug)]
enum Stmt {
    Ring(RingDecl),
    Extend { name: String, poly: Expr },
    Series { var: String, prec: usize },
    Let { name: String, expr: Expr },
    Generators(Vec<String>),
    Relator { lhs: Word, rhs: Option<Word> },
    Meridian(Word),
    Longitude(Word),
    Matrix { gen: String, entries: Vec<Vec<Expr>> },
    Task(TaskDecl),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub precision_s: Option<usize>,
    pub precision_p: Option<u32>,
    pub task_filter: Option<String>,
}

pub struct Job {
    pub ring: RingRc,
    pub rep: Representation,
    pub generator_names: Vec<String>,
    /// (source line, task) in declaration order.
    pub tasks: Vec<(usize, TaskDecl)>,
    /// Effective precisions after CLI overrides, for the report header.
    pub precision_p: Option<u32>,
    pub precision_s: Option<usize>,
    layers: Vec<RingRc>,
    env: Vec<(String, usize, Elem)>,
    stmts: Vec<(usize, Stmt)>,
}

// ---------- lexer ----------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex_line(line: usize, text: &str) -> Result<Vec<Token>, JobError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: i64 = text[start..i].parse().map_err(|_| JobError::Syntax {
                line,
                col,
                msg: "integer literal out of range".into(),
            })?;
            out.push(Token { tok: Tok::Int(n), col });
            continue;
        }
        if "+-*/^()[],;:=".contains(c) {
            out.push(Token { tok: Tok::Punct(c), col });
            i += 1;
            continue;
        }
        return Err(JobError::Syntax {
            line,
            col,
            msg: format!("unexpected character '{c}'"),
        });
    }
    Ok(out)
}

// ---------- token cursor ----------

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    width: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, toks: &'a [Token], width: usize) -> Self {
        Cursor { toks, pos: 0, line, width }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.width + 1)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> JobError {
        JobError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Punct(p)) if *p == c)
    }

    fn expect_punct(&mut self, c: char) -> Result<(), JobError> {
        if self.is_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, JobError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn expect_int(&mut self) -> Result<i64, JobError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn expect_signed_int(&mut self) -> Result<i64, JobError> {
        if self.is_punct('-') {
            self.pos += 1;
            Ok(-self.expect_int()?)
        } else {
            self.expect_int()
        }
    }

    fn finish(&self) -> Result<(), JobError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

// ---------- expression parser ----------

fn parse_expr(cur: &mut Cursor) -> Result<Expr, JobError> {
    let mut lhs = parse_term(cur)?;
    loop {
        let op = match cur.peek() {
            Some(Tok::Punct('+')) => BinOp::Add,
            Some(Tok::Punct('-')) => BinOp::Sub,
            _ => break,
        };
        cur.bump();
        let rhs = parse_term(cur)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_term(cur: &mut Cursor) -> Result<Expr, JobError> {
    let mut lhs = parse_factor(cur)?;
    loop {
        let op = match cur.peek() {
            Some(Tok::Punct('*')) => BinOp::Mul,
            Some(Tok::Punct('/')) => BinOp::Div,
            _ => break,
        };
        cur.bump();
        let rhs = parse_factor(cur)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_factor(cur: &mut Cursor) -> Result<Expr, JobError> {
    if cur.is_punct('-') {
        cur.bump();
        return Ok(Expr::Neg(Box::new(parse_factor(cur)?)));
    }
    let base = parse_atom(cur)?;
    if cur.is_punct('^') {
        cur.bump();
        let e = cur.expect_signed_int()?;
        return Ok(Expr::Pow(Box::new(base), e));
    }
    Ok(base)
}

fn parse_atom(cur: &mut Cursor) -> Result<Expr, JobError> {
    match cur.peek() {
        Some(Tok::Int(n)) => {
            let n = *n;
            cur.bump();
            Ok(Expr::Int(n))
        }
        Some(Tok::Punct('(')) => {
            cur.bump();
            let e = parse_expr(cur)?;
            cur.expect_punct(')')?;
            Ok(e)
        }
        Some(Tok::Ident(s)) if s == "sqrt" => {
            let line = cur.line;
            cur.bump();
            cur.expect_punct('(')?;
            let arg = parse_expr(cur)?;
            if cur.is_punct(')') {
                return Err(JobError::MissingWitness { line });
            }
            cur.expect_punct(';')?;
            let w = parse_expr(cur)?;
            cur.expect_punct(')')?;
            Ok(Expr::Sqrt(Box::new(arg), Box::new(w)))
        }
        Some(Tok::Ident(s)) if s == "root" => {
            let line = cur.line;
            cur.bump();
            cur.expect_punct('(')?;
            let var = cur.expect_ident()?;
            cur.expect_punct(':')?;
            let poly = parse_expr(cur)?;
            if cur.is_punct(')') {
                return Err(JobError::MissingWitness { line });
            }
            cur.expect_punct(';')?;
            let seed = parse_expr(cur)?;
            cur.expect_punct(')')?;
            Ok(Expr::Root { var, poly: Box::new(poly), seed: Box::new(seed) })
        }
        Some(Tok::Ident(s)) => {
            let s = s.clone();
            cur.bump();
            Ok(Expr::Name(s))
        }
        _ => Err(cur.err("expected an expression")),
    }
}

// ---------- word parser ----------

fn gen_index(line: usize, gens: &[String], name: &str) -> Result<i32, JobError> {
    gens.iter()
        .position(|g| g == name)
        .map(|i| (i + 1) as i32)
        .ok_or_else(|| JobError::Undeclared { line, name: name.to_string() })
}

fn parse_word(cur: &mut Cursor, gens: &[String]) -> Result<Word, JobError> {
    let mut out: Word = Vec::new();
    while matches!(cur.peek(), Some(Tok::Ident(_))) {
        let name = cur.expect_ident()?;
        let idx = gen_index(cur.line, gens, &name)?;
        let mut e: i64 = 1;
        if cur.is_punct('^') {
            cur.bump();
            e = cur.expect_signed_int()?;
            if e == 0 {
                return Err(cur.err("word exponent must be nonzero"));
            }
            if e.unsigned_abs() > 64 {
                return Err(cur.err("word exponent out of range (|e| <= 64)"));
            }
        }
        let letter = if e > 0 { idx } else { -idx };
        for _ in 0..e.unsigned_abs() {
            out.push(letter);
        }
    }
    if out.is_empty() {
        return Err(cur.err("expected a word over the declared generators"));
    }
    Ok(out)
}

fn word_string(w: &[i32], gens: &[String]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let l = w[i];
        let mut run = 1;
        while i + run < w.len() && w[i + run] == l {
            run += 1;
        }
        let name = &gens[(l.unsigned_abs() as usize) - 1];
        let e = if l > 0 { run as i64 } else { -(run as i64) };
        if e == 1 {
            parts.push(name.clone());
        } else {
            parts.push(format!("{name}^{e}"));
        }
        i += run;
    }
    parts.join(" ")
}

// ---------- statement parser ----------

fn parse_stmt(
    line: usize,
    toks: &[Token],
    width: usize,
    gens: &mut Vec<String>,
) -> Result<Stmt, JobError> {
    let mut cur = Cursor::new(line, toks, width);
    let head = cur.expect_ident()?;
    let stmt = match head.as_str() {
        "ring" => {
            let kind = cur.expect_ident()?;
            match kind.as_str() {
                "rationals" => Stmt::Ring(RingDecl::Rationals),
                "prime_field" => {
                    let p = cur.expect_int()?;
                    Stmt::Ring(RingDecl::PrimeField(p as u64))
                }
                "padic" => {
                    let p = cur.expect_int()? as u64;
                    let kw = cur.expect_ident()?;
                    if kw != "precision" {
                        return Err(cur.err("expected 'precision'"));
                    }
                    let n = cur.expect_int()?;
                    if n < 1 {
                        return Err(cur.err("precision must be >= 1"));
                    }
                    Stmt::Ring(RingDecl::Padic { p, prec: n as u32 })
                }
                _ => return Err(cur.err("expected rationals, prime_field, or padic")),
            }
        }
        "extend" => {
            let name = cur.expect_ident()?;
            check_name(line, &name)?;
            cur.expect_punct(':')?;
            let poly = parse_expr(&mut cur)?;
            Stmt::Extend { name, poly }
        }
        "series" => {
            let var = cur.expect_ident()?;
            check_name(line, &var)?;
            let kw = cur.expect_ident()?;
            if kw != "precision" {
                return Err(cur.err("expected 'precision'"));
            }
            let n = cur.expect_int()?;
            if n < 2 {
                return Err(cur.err("series precision must be >= 2"));
            }
            Stmt::Series { var, prec: n as usize }
        }
        "let" => {
            let name = cur.expect_ident()?;
            check_name(line, &name)?;
            cur.expect_punct('=')?;
            let expr = parse_expr(&mut cur)?;
            Stmt::Let { name, expr }
        }
        "generators" => {
            let mut names = Vec::new();
            while matches!(cur.peek(), Some(Tok::Ident(_))) {
                let n = cur.expect_ident()?;
                check_name(line, &n)?;
                if names.contains(&n) {
                    return Err(JobError::Invalid {
                        line,
                        msg: format!("duplicate generator '{n}'"),
                    });
                }
                names.push(n);
            }
            if names.len() < 2 {
                return Err(JobError::Invalid {
                    line,
                    msg: "at least two generators are required".into(),
                });
            }
            *gens = names.clone();
            Stmt::Generators(names)
        }
        "relator" | "meridian" | "longitude" => {
            if gens.is_empty() {
                return Err(JobError::Invalid {
                    line,
                    msg: "generators must be declared before words".into(),
                });
            }
            let w = parse_word(&mut cur, gens)?;
            match head.as_str() {
                "relator" => {
                    let rhs = if cur.is_punct('=') {
                        cur.bump();
                        Some(parse_word(&mut cur, gens)?)
                    } else {
                        None
                    };
                    Stmt::Relator { lhs: w, rhs }
                }
                "meridian" => Stmt::Meridian(w),
                _ => Stmt::Longitude(w),
            }
        }
        "matrix" => {
            if gens.is_empty() {
                return Err(JobError::Invalid {
                    line,
                    msg: "generators must be declared before matrices".into(),
                });
            }
            let g = cur.expect_ident()?;
            gen_index(line, gens, &g)?;
            cur.expect_punct('=')?;
            cur.expect_punct('[')?;
            let mut rows = Vec::new();
            for r in 0..2 {
                cur.expect_punct('[')?;
                let e1 = parse_expr(&mut cur)?;
                cur.expect_punct(',')?;
                let e2 = parse_expr(&mut cur)?;
                cur.expect_punct(']')?;
                rows.push(vec![e1, e2]);
                if r == 0 {
                    cur.expect_punct(',')?;
                }
            }
            cur.expect_punct(']')?;
            Stmt::Matrix { gen: g, entries: rows }
        }
        "task" => {
            let kind = cur.expect_ident()?;
            let task = match kind.as_str() {
                "selmer" => {
                    let mode = cur.expect_ident()?;
                    let mode = match mode.as_str() {
                        "meridian" => ModeDecl::Meridian,
                        "longitude" => ModeDecl::Longitude,
                        "porti" => {
                            let t_mu = cur.expect_ident()?;
                            let t_lambda = cur.expect_ident()?;
                            ModeDecl::Porti { t_mu, t_lambda }
                        }
                        "word" => {
                            if gens.is_empty() {
                                return Err(JobError::Invalid {
                                    line,
                                    msg: "generators must be declared before words".into(),
                                });
                            }
                            ModeDecl::Word(parse_word(&mut cur, gens)?)
                        }
                        _ => {
                            return Err(cur.err(
                                "expected meridian, longitude, porti, or word",
                            ))
                        }
                    };
                    TaskDecl::Selmer(mode)
                }
                "two_variable" => TaskDecl::TwoVariable,
                "conjecture" => TaskDecl::Conjecture,
                "residual" | "irreducibility" => {
                    let p = cur.expect_int()? as u64;
                    let mut images = Vec::new();
                    while matches!(cur.peek(), Some(Tok::Ident(_))) {
                        let n = cur.expect_ident()?;
                        cur.expect_punct('=')?;
                        let e = parse_expr(&mut cur)?;
                        images.push((n, e));
                    }
                    if kind == "residual" {
                        TaskDecl::Residual { p, images }
                    } else {
                        TaskDecl::Irreducibility { p, images }
                    }
                }
                _ => {
                    return Err(cur.err(
                        "expected selmer, two_variable, conjecture, residual, or irreducibility",
                    ))
                }
            };
            Stmt::Task(task)
        }
        other => {
            return Err(JobError::Syntax {
                line,
                col: 1,
                msg: format!("unknown statement '{other}'"),
            })
        }
    };
    cur.finish()?;
    Ok(stmt)
}

fn check_name(line: usize, name: &str) -> Result<(), JobError> {
    if RESERVED.contains(&name) {
        return Err(JobError::Invalid {
            line,
            msg: format!("'{name}' is a reserved word"),
        });
    }
    Ok(())
}

// ---------- expression evaluation ----------

struct EvalCtx<'a> {
    layers: &'a [RingRc],
    env: &'a [(String, usize, Elem)],
    bound: Option<&'a str>,
    line: usize,
}

fn lift_between(layers: &[RingRc], mut v: Elem, from: usize, to: usize) -> Elem {
    for layer in &layers[from + 1..=to] {
        v = layer.lift(v);
    }
    v
}

impl<'a> EvalCtx<'a> {
    fn ring(&self) -> &RingRc {
        self.layers.last().expect("ring declared")
    }

    fn ring_err(&self, e: crate::error::RingError) -> JobError {
        JobError::Invalid { line: self.line, msg: e.to_string() }
    }

    fn lookup(&self, name: &str) -> Option<Elem> {
        self.env
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, idx, v)| lift_between(self.layers, v.clone(), *idx, self.layers.len() - 1))
    }

    /// Coefficient vector in the bound variable (constant first); empty = 0.
    fn eval(&self, e: &Expr) -> Result<Vec<Elem>, JobError> {
        let ring = self.ring();
        let out = match e {
            Expr::Int(n) => vec![ring.from_i64(*n)],
            Expr::Name(n) => {
                if self.bound == Some(n.as_str()) {
                    vec![ring.zero(), ring.one()]
                } else if let Some(v) = self.lookup(n) {
                    vec![v]
                } else if n == "t" {
                    return Err(JobError::TypeMismatch {
                        line: self.line,
                        msg: "the Laurent variable t is only available inside two-variable tasks"
                            .into(),
                    });
                } else {
                    return Err(JobError::Undeclared { line: self.line, name: n.clone() });
                }
            }
            Expr::Bin(op, a, b) => {
                let (va, vb) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => self.padd(&va, &vb),
                    BinOp::Sub => self.psub(&va, &vb),
                    BinOp::Mul => self.pmul(&va, &vb),
                    BinOp::Div => {
                        if vb.len() > 1 {
                            return Err(JobError::TypeMismatch {
                                line: self.line,
                                msg: "division by a polynomial in the bound variable".into(),
                            });
                        }
                        let d = vb.first().cloned().unwrap_or_else(|| ring.zero());
                        if ring.is_zero(&d) {
                            return Err(JobError::Invalid {
                                line: self.line,
                                msg: "division by zero".into(),
                            });
                        }
                        let q: Result<Vec<Elem>, _> =
                            va.iter().map(|c| ring.div(c, &d)).collect();
                        q.map_err(|e| self.ring_err(e))?
                    }
                }
            }
            Expr::Neg(a) => {
                let v = self.eval(a)?;
                v.iter().map(|c| self.ring().neg(c)).collect()
            }
            Expr::Pow(a, k) => {
                let v = self.eval(a)?;
                if *k < 0 {
                    let s = self.scalar(&v)?;
                    return Ok(vec![ring.pow(&s, *k).map_err(|e| self.ring_err(e))?]);
                }
                let mut acc = vec![ring.one()];
                for _ in 0..*k {
                    acc = self.pmul(&acc, &v);
                }
                acc
            }
            Expr::Sqrt(a, w) => {
                let arg = self.scalar(&self.eval(a)?)?;
                let wit = self.scalar(&self.eval(w)?)?;
                let wit = self.lower_witness(wit)?;
                vec![ring.sqrt(&arg, &wit).map_err(|e| self.ring_err(e))?]
            }
            Expr::Root { var, poly, seed } => {
                if self.bound.is_some() {
                    return Err(JobError::TypeMismatch {
                        line: self.line,
                        msg: "root(...) cannot be nested inside another bound variable".into(),
                    });
                }
                let inner = EvalCtx {
                    layers: self.layers,
                    env: self.env,
                    bound: Some(var.as_str()),
                    line: self.line,
                };
                let coeffs = inner.eval(poly)?;
                if coeffs.len() < 2 {
                    return Err(JobError::TypeMismatch {
                        line: self.line,
                        msg: format!("root polynomial does not involve '{var}'"),
                    });
                }
                let s = self.scalar(&self.eval(seed)?)?;
                vec![ring.algebraic_root(&coeffs, &s).map_err(|e| self.ring_err(e))?]
            }
        };
        let ring = self.ring();
        let mut out = out;
        while out.last().map(|c| ring.is_zero(c)).unwrap_or(false) {
            out.pop();
        }
        Ok(out)
    }

    fn scalar(&self, v: &[Elem]) -> Result<Elem, JobError> {
        if v.len() > 1 {
            return Err(JobError::TypeMismatch {
                line: self.line,
                msg: "a scalar is required here, not a polynomial in the bound variable".into(),
            });
        }
        Ok(v.first().cloned().unwrap_or_else(|| self.ring().zero()))
    }

    /// Series square-root witnesses live in the coefficient ring: accept a
    /// constant series and strip it down.
    fn lower_witness(&self, w: Elem) -> Result<Elem, JobError> {
        let ring = self.ring();
        if let (Ring::Series { base, .. }, Elem::Ser(v)) = (&**ring, &w) {
            for c in &v[1..] {
                if !base.is_zero(c) {
                    return Err(JobError::TypeMismatch {
                        line: self.line,
                        msg: "sqrt witness must be constant in the series variable".into(),
                    });
                }
            }
            return Ok(v[0].clone());
        }
        Ok(w)
    }

    fn padd(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let ring = self.ring();
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => ring.add(x, y),
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => ring.zero(),
            })
            .collect()
    }

    fn psub(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let nb: Vec<Elem> = b.iter().map(|c| self.ring().neg(c)).collect();
        self.padd(a, &nb)
    }

    fn pmul(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let ring = self.ring();
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![ring.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = ring.add(&out[i + j], &ring.mul(x, y));
            }
        }
        out
    }
}

// ---------- job assembly ----------

pub fn parse_job(text: &str, opts: &RunOptions) -> Result<Job, JobError> {
    let mut gens: Vec<String> = Vec::new();
    let mut stmts: Vec<(usize, Stmt)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = lex_line(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        stmts.push((line, parse_stmt(line, &toks, raw.len(), &mut gens)?));
    }

    let mut layers: Vec<RingRc> = Vec::new();
    let mut env: Vec<(String, usize, Elem)> = Vec::new();
    let mut relators: Vec<Word> = Vec::new();
    let mut relator_lines: Vec<usize> = Vec::new();
    let mut meridian: Option<Word> = None;
    let mut longitude: Option<Word> = None;
    let mut matrices: Vec<(usize, String, Mat, usize)> = Vec::new();
    let mut tasks: Vec<(usize, TaskDecl)> = Vec::new();
    let mut generators_line = 0usize;
    let mut precision_p: Option<u32> = None;
    let mut precision_s: Option<usize> = None;
    let mut series_seen = false;

    let invalid = |line: usize, msg: String| JobError::Invalid { line, msg };

    for (line, stmt) in &stmts {
        let line = *line;
        match stmt {
            Stmt::Ring(decl) => {
                if !layers.is_empty() {
                    return Err(invalid(line, "ring is already declared".into()));
                }
                let r = match decl {
                    RingDecl::Rationals => Ring::rationals(),
                    RingDecl::PrimeField(p) => Ring::prime_field(*p)
                        .map_err(|e| invalid(line, e.to_string()))?,
                    RingDecl::Padic { p, prec } => {
                        let n = opts.precision_p.unwrap_or(*prec);
                        precision_p = Some(n);
                        Ring::padic(*p, n).map_err(|e| invalid(line, e.to_string()))?
                    }
                };
                layers.push(r);
            }
            Stmt::Extend { name, poly } => {
                if layers.is_empty() {
                    return Err(invalid(line, "declare the ring first".into()));
                }
                if env.iter().any(|(n, _, _)| n == name) {
                    return Err(invalid(line, format!("name '{name}' is already bound")));
                }
                let ctx = EvalCtx { layers: &layers, env: &env, bound: Some(name), line };
                let coeffs = ctx.eval(poly)?;
                let top = layers.last().unwrap().clone();
                let ext = Ring::extension(top, coeffs, name)
                    .map_err(|e| invalid(line, e.to_string()))?;
                let g = ext.gen().map_err(|e| invalid(line, e.to_string()))?;
                layers.push(ext);
                env.push((name.clone(), layers.len() - 1, g));
            }
            Stmt::Series { var, prec } => {
                if layers.is_empty() {
                    return Err(invalid(line, "declare the ring first".into()));
                }
                if series_seen {
                    return Err(invalid(line, "only one series layer is supported".into()));
                }
                if env.iter().any(|(n, _, _)| n == var) {
                    return Err(invalid(line, format!("name '{var}' is already bound")));
                }
                series_seen = true;
                let n = opts.precision_s.unwrap_or(*prec);
                precision_s = Some(n);
                let top = layers.last().unwrap().clone();
                let ser = Ring::series(top, n, var).map_err(|e| invalid(line, e.to_string()))?;
                let g = ser.gen().map_err(|e| invalid(line, e.to_string()))?;
                layers.push(ser);
                env.push((var.clone(), layers.len() - 1, g));
            }
            Stmt::Let { name, expr } => {
                if layers.is_empty() {
                    return Err(invalid(line, "declare the ring first".into()));
                }
                if env.iter().any(|(n, _, _)| n == name) {
                    return Err(invalid(line, format!("name '{name}' is already bound")));
                }
                let ctx = EvalCtx { layers: &layers, env: &env, bound: None, line };
                let v = ctx.scalar(&ctx.eval(expr)?)?;
                env.push((name.clone(), layers.len() - 1, v));
            }
            Stmt::Generators(names) => {
                if generators_line != 0 {
                    return Err(invalid(line, "generators are already declared".into()));
                }
                generators_line = line;
                for n in names {
                    if env.iter().any(|(en, _, _)| en == n) {
                        return Err(invalid(
                            line,
                            format!("generator '{n}' collides with a declared constant"),
                        ));
                    }
                }
            }
            Stmt::Relator { lhs, rhs } => {
                let r = match rhs {
                    Some(rhs) => wmul(lhs, &winv(rhs)),
                    None => wreduce(lhs),
                };
                relators.push(r);
                relator_lines.push(line);
            }
            Stmt::Meridian(w) => meridian = Some(w.clone()),
            Stmt::Longitude(w) => longitude = Some(w.clone()),
            Stmt::Matrix { gen, entries } => {
                if layers.is_empty() {
                    return Err(invalid(line, "declare the ring first".into()));
                }
                if matrices.iter().any(|(_, g, _, _)| g == gen) {
                    return Err(invalid(line, format!("matrix for '{gen}' is already declared")));
                }
                let ctx = EvalCtx { layers: &layers, env: &env, bound: None, line };
                let mut m: Mat = Vec::new();
                for row in entries {
                    let mut r = Vec::new();
                    for e in row {
                        r.push(ctx.scalar(&ctx.eval(e)?)?);
                    }
                    m.push(r);
                }
                matrices.push((line, gen.clone(), m, layers.len() - 1));
            }
            Stmt::Task(t) => tasks.push((line, t.clone())),
        }
    }

    if layers.is_empty() {
        return Err(invalid(1, "no ring declared".into()));
    }
    if gens.is_empty() {
        return Err(invalid(1, "no generators declared".into()));
    }
    let ring = layers.last().unwrap().clone();

    // assemble the presentation
    let mut pres = Presentation::new(gens.len(), relators);
    if let Some(m) = meridian {
        pres.meridian = wreduce(&m);
    }
    pres.longitude = longitude.as_ref().map(|w| wreduce(w));
    let findings = pres.validate();
    if !findings.is_empty() {
        return Err(invalid(generators_line, findings.join("; ")));
    }

    // matrices in generator order, lifted to the final layer
    let mut images: Vec<Mat> = Vec::new();
    let mut matrix_lines: Vec<usize> = Vec::new();
    let top = layers.len() - 1;
    for g in &gens {
        let found = matrices.iter().find(|(_, name, _, _)| name == g).ok_or_else(|| {
            invalid(generators_line, format!("no matrix declared for generator '{g}'"))
        })?;
        let (mline, _, m, layer) = found;
        let lifted: Mat = m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| lift_between(&layers, e.clone(), *layer, top))
                    .collect()
            })
            .collect();
        images.push(lifted);
        matrix_lines.push(*mline);
    }

    let rep = rep_from_assignment(pres, ring.clone(), images).map_err(|e| match &e {
        crate::error::RepError::Determinant { index } => JobError::Invalid {
            line: matrix_lines[*index - 1],
            msg: e.to_string(),
        },
        crate::error::RepError::RelatorViolation { index, .. } => JobError::Invalid {
            line: relator_lines.get(*index - 1).copied().unwrap_or(generators_line),
            msg: e.to_string(),
        },
        _ => JobError::Invalid { line: generators_line, msg: e.to_string() },
    })?;

    // static task validation
    for (tline, t) in &tasks {
        match t {
            TaskDecl::Selmer(ModeDecl::Longitude) | TaskDecl::Conjecture => {
                if rep.presentation.longitude.is_none() {
                    return Err(invalid(*tline, "this task requires a declared longitude".into()));
                }
            }
            TaskDecl::Selmer(ModeDecl::Porti { t_mu, t_lambda }) => {
                if rep.presentation.longitude.is_none() {
                    return Err(invalid(*tline, "this task requires a declared longitude".into()));
                }
                for n in [t_mu, t_lambda] {
                    if !env.iter().any(|(en, _, _)| en == n) {
                        return Err(JobError::Undeclared { line: *tline, name: n.clone() });
                    }
                }
            }
            TaskDecl::Residual { p, .. } | TaskDecl::Irreducibility { p, .. } => {
                Ring::prime_field(*p).map_err(|e| invalid(*tline, e.to_string()))?;
            }
            _ => {}
        }
    }

    Ok(Job {
        ring,
        rep,
        generator_names: gens,
        tasks,
        precision_p,
        precision_s,
        layers,
        env,
        stmts,
    })
}

impl Job {
    /// A declared constant, lifted into the final ring layer.
    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.env
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, idx, v)| lift_between(&self.layers, v.clone(), *idx, self.layers.len() - 1))
    }

    /// Evaluate residual-image expressions over the target prime field.
    pub fn residual_images(
        &self,
        line: usize,
        target: &RingRc,
        images: &[(String, Expr)],
    ) -> Result<Vec<(String, Elem)>, JobError> {
        let layers = vec![target.clone()];
        let ctx = EvalCtx { layers: &layers, env: &[], bound: None, line };
        images
            .iter()
            .map(|(n, e)| Ok((n.clone(), ctx.scalar(&ctx.eval(e)?)?)))
            .collect()
    }

    /// Canonical job text; parsing it back yields the same canonical text.
    pub fn unparse(&self) -> String {
        let gens = &self.generator_names;
        let mut out = String::new();
        for (_, stmt) in &self.stmts {
            let line = match stmt {
                Stmt::Ring(RingDecl::Rationals) => "ring rationals".to_string(),
                Stmt::Ring(RingDecl::PrimeField(p)) => format!("ring prime_field {p}"),
                Stmt::Ring(RingDecl::Padic { p, prec }) => {
                    format!("ring padic {p} precision {prec}")
                }
                Stmt::Extend { name, poly } => {
                    format!("extend {name} : {}", expr_string(poly))
                }
                Stmt::Series { var, prec } => format!("series {var} precision {prec}"),
                Stmt::Let { name, expr } => format!("let {name} = {}", expr_string(expr)),
                Stmt::Generators(names) => format!("generators {}", names.join(" ")),
                Stmt::Relator { lhs, rhs } => match rhs {
                    Some(r) => {
                        format!("relator {} = {}", word_string(lhs, gens), word_string(r, gens))
                    }
                    None => format!("relator {}", word_string(lhs, gens)),
                },
                Stmt::Meridian(w) => format!("meridian {}", word_string(w, gens)),
                Stmt::Longitude(w) => format!("longitude {}", word_string(w, gens)),
                Stmt::Matrix { gen, entries } => format!(
                    "matrix {gen} = [[{}, {}], [{}, {}]]",
                    expr_string(&entries[0][0]),
                    expr_string(&entries[0][1]),
                    expr_string(&entries[1][0]),
                    expr_string(&entries[1][1]),
                ),
                Stmt::Task(t) => match t {
                    TaskDecl::Selmer(ModeDecl::Meridian) => "task selmer meridian".into(),
                    TaskDecl::Selmer(ModeDecl::Longitude) => "task selmer longitude".into(),
                    TaskDecl::Selmer(ModeDecl::Porti { t_mu, t_lambda }) => {
                        format!("task selmer porti {t_mu} {t_lambda}")
                    }
                    TaskDecl::Selmer(ModeDecl::Word(w)) => {
                        format!("task selmer word {}", word_string(w, gens))
                    }
                    TaskDecl::TwoVariable => "task two_variable".into(),
                    TaskDecl::Conjecture => "task conjecture".into(),
                    TaskDecl::Residual { p, images } => {
                        let mut s = format!("task residual {p}");
                        for (n, e) in images {
                            s.push_str(&format!(" {n} = {}", expr_string(e)));
                        }
                        s
                    }
                    TaskDecl::Irreducibility { p, images } => {
                        let mut s = format!("task irreducibility {p}");
                        for (n, e) in images {
                            s.push_str(&format!(" {n} = {}", expr_string(e)));
                        }
                        s
                    }
                },
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

// ---------- expression printing ----------

fn op_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Add | BinOp::Sub => 1,
        BinOp::Mul | BinOp::Div => 2,
    }
}

fn op_sym(op: BinOp) -> char {
    match op {
        BinOp::Add => '+',
        BinOp::Sub => '-',
        BinOp::Mul => '*',
        BinOp::Div => '/',
    }
}

pub fn expr_string(e: &Expr) -> String {
    expr_prec(e, 0)
}

fn expr_prec(e: &Expr, min: u8) -> String {
    let (s, p) = match e {
        Expr::Int(n) => (n.to_string(), 5),
        Expr::Name(n) => (n.clone(), 5),
        Expr::Bin(op, a, b) => {
            let p = op_prec(*op);
            (
                format!("{} {} {}", expr_prec(a, p), op_sym(*op), expr_prec(b, p + 1)),
                p,
            )
        }
        Expr::Neg(a) => (format!("-{}", expr_prec(a, 3)), 3),
        Expr::Pow(a, k) => (format!("{}^{}", expr_prec(a, 4), k), 4),
        Expr::Sqrt(a, w) => (format!("sqrt({}; {})", expr_string(a), expr_string(w)), 5),
        Expr::Root { var, poly, seed } => (
            format!("root({var} : {}; {})", expr_string(poly), expr_string(seed)),
            5,
        ),
    };
    if p < min {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_series_job() -> &'static str {
        "\
ring rationals
extend w : w^2 + 3
series s precision 8
let x = s^2 + 1
let e = sqrt(x^2 - 4; w)
generators a b
relator a b = b a
meridian a
matrix a = [[1, x + e], [0, 1]]
matrix b = [[1, 0], [0, 1]]
task selmer meridian
"
    }

    #[test]
    fn parses_and_unparses_idempotently() {
        let opts = RunOptions::default();
        let job = parse_job(toy_series_job(), &opts).unwrap();
        let once = job.unparse();
        let job2 = parse_job(&once, &opts).unwrap();
        assert_eq!(once, job2.unparse());
        assert_eq!(job.generator_names, vec!["a", "b"]);
        assert_eq!(job.rep.presentation.meridian, vec![1]);
        assert_eq!(job.rep.presentation.relators[0], vec![1, 2, -1, -2]);
    }

    #[test]
    fn missing_witness_is_flagged() {
        let text = "ring rationals\nlet x = sqrt(2)\n";
        match parse_job(text, &RunOptions::default()) {
            Err(JobError::MissingWitness { line }) => assert_eq!(line, 2),
            Err(e) => panic!("expected missing-witness error, got {e}"),
            Ok(_) => panic!("unexpectedly parsed"),
        }
    }

    #[test]
    fn undeclared_name_reports_line() {
        let text = "ring rationals\nlet x = y + 1\n";
        match parse_job(text, &RunOptions::default()) {
            Err(JobError::Undeclared { line, name }) => {
                assert_eq!((line, name.as_str()), (2, "y"));
            }
            Err(e) => panic!("expected undeclared-name error, got {e}"),
            Ok(_) => panic!("unexpectedly parsed"),
        }
    }

    #[test]
    fn syntax_error_carries_column() {
        let text = "ring rationals\nlet x = (1 + \n";
        match parse_job(text, &RunOptions::default()) {
            Err(JobError::Syntax { line, col, .. }) => {
                assert_eq!(line, 2);
                assert!(col > 10);
            }
            Err(e) => panic!("expected syntax error, got {e}"),
            Ok(_) => panic!("unexpectedly parsed"),
        }
    }

    #[test]
    fn determinant_violation_points_at_matrix_line() {
        let text = "\
ring rationals
generators a b
relator a b = b a
matrix a = [[1, 1], [0, 2]]
matrix b = [[1, 0], [0, 1]]
";
        match parse_job(text, &RunOptions::default()) {
            Err(JobError::Invalid { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("determinant"), "{msg}");
            }
            Err(e) => panic!("expected invalid error, got {e}"),
            Ok(_) => panic!("unexpectedly parsed"),
        }
    }

    #[test]
    fn precision_override_applies() {
        let opts = RunOptions { precision_s: Some(12), ..Default::default() };
        let job = parse_job(toy_series_job(), &opts).unwrap();
        assert_eq!(job.precision_s, Some(12));
        let Ring::Series { prec, .. } = &*job.ring else { panic!() };
        assert_eq!(*prec, 12);
        // the declared text is preserved
        assert!(job.unparse().contains("series s precision 8"));
    }

    #[test]
    fn expression_printing_round_trips() {
        let cases = [
            "let q = -x^2 + 3 * (y - 1) / 2",
            "let q = 2 - -3",
            "let q = root(z : z^3 - 2*z - 53 - x; 4)",
            "let q = sqrt(x + 1; 2) * x^-1",
        ];
        let tail = "generators a b\nrelator a b = b a\n\
                    matrix a = [[1, 0], [0, 1]]\nmatrix b = [[1, 0], [0, 1]]\n";
        for c in cases {
            let text = format!("ring rationals\nlet x = 3\nlet y = 1\n{c}\n{tail}");
            let job = match parse_job(&text, &RunOptions::default()) {
                Ok(j) => j,
                Err(e) => panic!("{c}: {e}"),
            };
            let once = job.unparse();
            let again = parse_job(&once, &RunOptions::default()).unwrap().unparse();
            assert_eq!(once, again, "{c}");
        }
    }
}
