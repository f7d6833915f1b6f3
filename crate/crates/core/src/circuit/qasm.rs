//! OpenQASM 3 subset: one qubit and one bit register, standard gates,
//! `measure`, `reset` and `if` blocks.
//!
//! Circuit metadata rides along in `// @` comments so that export followed
//! by import gives back the same circuit. Parity conditions are written as
//! an XOR of bits compared against a value, preceded by `// @parity`.

use std::fmt::Write as _;

use super::{Circuit, CircuitBuilder, CircuitError, Condition, Gate, Instruction, Predicate};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn condition_text(c: &Condition, num_clbits: usize) -> String {
    match &c.predicate {
        Predicate::Equals(v)
            if c.clbits.len() == num_clbits
                && c.clbits.iter().enumerate().all(|(i, &b)| i == b)
                && num_clbits < 64 =>
        {
            let value: u64 = v.iter().enumerate().map(|(k, &b)| (b as u64) << k).sum();
            format!("c == {value}")
        }
        Predicate::Equals(v) => {
            let terms: Vec<String> = c
                .clbits
                .iter()
                .zip(v)
                .map(|(k, &b)| format!("c[{k}] == {}", b as u8))
                .collect();
            terms.join(" && ")
        }
        Predicate::Parity(b) => {
            let bits: Vec<String> = c.clbits.iter().map(|k| format!("c[{k}]")).collect();
            format!("({}) == {}", bits.join(" ^ "), *b as u8)
        }
    }
}

fn write_inst(out: &mut String, inst: &Instruction, num_clbits: usize, indent: &str) {
    match inst {
        Instruction::Gate { gate, qubits } => {
            let args: Vec<String> = qubits.iter().map(|q| format!("q[{q}]")).collect();
            match gate.params().first() {
                Some(t) => writeln!(out, "{indent}{}({t:?}) {};", gate.name(), args.join(", ")),
                None => writeln!(out, "{indent}{} {};", gate.name(), args.join(", ")),
            }
            .expect("write to string");
        }
        Instruction::Measure { qubit, clbit } => {
            writeln!(out, "{indent}c[{clbit}] = measure q[{qubit}];").expect("write to string");
        }
        Instruction::Reset { qubit } => {
            writeln!(out, "{indent}reset q[{qubit}];").expect("write to string")
        }
        Instruction::Conditional { condition, body } => {
            if matches!(condition.predicate, Predicate::Parity(_)) {
                writeln!(out, "{indent}// @parity").expect("write to string");
            }
            writeln!(
                out,
                "{indent}if ({}) {{",
                condition_text(condition, num_clbits)
            )
            .expect("write to string");
            for b in body {
                write_inst(out, b, num_clbits, &format!("{indent}  "));
            }
            writeln!(out, "{indent}}}").expect("write to string");
        }
    }
}

pub fn to_qasm(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    if !c.name().is_empty() {
        writeln!(out, "// @name {}", c.name()).expect("write to string");
    }
    for (k, v) in c.params() {
        writeln!(out, "// @param {k} {v:?}").expect("write to string");
    }
    let system: Vec<String> = c.system_qubits().iter().map(|q| q.to_string()).collect();
    writeln!(out, "// @system {}", system.join(" ")).expect("write to string");
    writeln!(
        out,
        "qubit[{}] q;\nbit[{}] c;",
        c.num_qubits(),
        c.num_clbits()
    )
    .expect("write to string");
    for inst in c.instructions() {
        write_inst(&mut out, inst, c.num_clbits(), "");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 14] = [
    "==", "&&", "->", "^", "(", ")", "[", "]", "{", "}", ";", ",", "=", "-",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, QasmError> {
    let mut toks = Vec::new();
    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split("//").next().unwrap_or("");
        let mut rest = code.trim_start();
        while !rest.is_empty() {
            let ch = rest.chars().next().expect("nonempty");
            let (tok, len) = if ch.is_ascii_alphabetic() || ch == '_' {
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                (Tok::Ident(rest[..len].to_string()), len)
            } else if ch.is_ascii_digit() || ch == '.' {
                let mut len = 0;
                let bytes = rest.as_bytes();
                while len < bytes.len() {
                    let b = bytes[len];
                    let exp_sign = (b == b'-' || b == b'+')
                        && len > 0
                        && matches!(bytes[len - 1], b'e' | b'E');
                    if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                        len += 1;
                    } else {
                        break;
                    }
                }
                (Tok::Num(rest[..len].to_string()), len)
            } else if ch == '"' {
                let end = rest[1..].find('"').ok_or(QasmError::Syntax {
                    line,
                    message: "unterminated string".into(),
                })?;
                (Tok::Str(rest[1..=end].to_string()), end + 2)
            } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                (Tok::Sym(sym), sym.len())
            } else {
                return Err(QasmError::Syntax {
                    line,
                    message: format!("unexpected character `{ch}`"),
                });
            };
            toks.push((tok, line));
            rest = rest[len..].trim_start();
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(0, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax {
            line: self.line(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Result<Tok, QasmError> {
        match self.toks.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn sym(&mut self, s: &'static str) -> Result<(), QasmError> {
        match self.next()? {
            Tok::Sym(t) if t == s => Ok(()),
            other => self.err(format!("expected `{s}`, found {other:?}")),
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            other => self.err(format!("expected a name, found {other:?}")),
        }
    }

    fn int(&mut self) -> Result<usize, QasmError> {
        match self.next()? {
            Tok::Num(s) => match s.parse() {
                Ok(v) => Ok(v),
                Err(_) => self.err(format!("expected an integer, found `{s}`")),
            },
            other => self.err(format!("expected an integer, found {other:?}")),
        }
    }

    fn float(&mut self) -> Result<f64, QasmError> {
        let negative = self.eat("-");
        let v = match self.next()? {
            Tok::Num(s) => match s.parse::<f64>() {
                Ok(v) => v,
                Err(_) => return self.err(format!("bad number `{s}`")),
            },
            Tok::Ident(s) if s == "pi" => std::f64::consts::PI,
            other => return self.err(format!("expected a number, found {other:?}")),
        };
        Ok(if negative { -v } else { v })
    }

    fn bit_value(&mut self) -> Result<bool, QasmError> {
        match self.int()? {
            0 => Ok(false),
            1 => Ok(true),
            v => self.err(format!("bit value must be 0 or 1, got {v}")),
        }
    }

    /// `name[index]` on the given register.
    fn indexed(&mut self, quantum: bool) -> Result<usize, QasmError> {
        let name = self.ident()?;
        let reg = if quantum { &self.qreg } else { &self.creg };
        let Some((want, size)) = reg.clone() else {
            return self.err("register used before declaration");
        };
        if name != want {
            return self.err(format!("unknown register `{name}`"));
        }
        self.sym("[")?;
        let i = self.int()?;
        self.sym("]")?;
        if i >= size {
            return self.err(format!("index {i} out of range for `{name}[{size}]`"));
        }
        Ok(i)
    }

    fn condition(&mut self) -> Result<Condition, QasmError> {
        // Whole-register comparison `c == v`.
        if let (Some(Tok::Ident(_)), Some(Tok::Sym("=="))) = (
            self.toks.get(self.pos).map(|t| &t.0),
            self.toks.get(self.pos + 1).map(|t| &t.0),
        ) {
            let name = self.ident()?;
            let Some((want, size)) = self.creg.clone() else {
                return self.err("condition before bit declaration");
            };
            if name != want {
                return self.err(format!("unknown register `{name}`"));
            }
            self.sym("==")?;
            let v = self.int()?;
            let bits: Vec<bool> = (0..size).map(|k| k < 64 && (v >> k) & 1 == 1).collect();
            if size < 64 && v >> size != 0 {
                return self.err(format!("value {v} does not fit in {size} bits"));
            }
            return Ok(Condition::equals(&(0..size).collect::<Vec<_>>(), &bits)?);
        }
        if self.eat("(") {
            let mut clbits = vec![self.indexed(false)?];
            while self.eat("^") {
                clbits.push(self.indexed(false)?);
            }
            self.sym(")")?;
            self.sym("==")?;
            let v = self.bit_value()?;
            return Ok(Condition::parity(&clbits, v)?);
        }
        let mut clbits = Vec::new();
        let mut values = Vec::new();
        loop {
            clbits.push(self.indexed(false)?);
            self.sym("==")?;
            values.push(self.bit_value()?);
            if !self.eat("&&") {
                break;
            }
        }
        Ok(Condition::equals(&clbits, &values)?)
    }

    fn statement(&mut self, b: &mut Vec<Instruction>, in_body: bool) -> Result<(), QasmError> {
        let line = self.line();
        let head = self.ident()?;
        match head.as_str() {
            "reset" => {
                let q = self.indexed(true)?;
                self.sym(";")?;
                b.push(Instruction::Reset { qubit: q });
            }
            "measure" => {
                let q = self.indexed(true)?;
                self.sym("->")?;
                let c = self.indexed(false)?;
                self.sym(";")?;
                b.push(Instruction::Measure { qubit: q, clbit: c });
            }
            "if" if !in_body => {
                self.sym("(")?;
                let cond = self.condition()?;
                self.sym(")")?;
                self.sym("{")?;
                let mut body = Vec::new();
                while !self.eat("}") {
                    self.statement(&mut body, true)?;
                }
                b.push(Instruction::Conditional {
                    condition: cond,
                    body,
                });
            }
            "if" => {
                return Err(QasmError::Unsupported(format!(
                    "nested `if` on line {line}"
                )))
            }
            name if self.creg.as_ref().is_some_and(|(c, _)| c == name)
                && self.peek() == Some(&Tok::Sym("[")) =>
            {
                self.pos -= 1;
                let c = self.indexed(false)?;
                self.sym("=")?;
                if self.ident()? != "measure" {
                    return self.err("expected `measure`");
                }
                let q = self.indexed(true)?;
                self.sym(";")?;
                b.push(Instruction::Measure { qubit: q, clbit: c });
            }
            name => {
                let mut params = Vec::new();
                if self.eat("(") {
                    params.push(self.float()?);
                    while self.eat(",") {
                        params.push(self.float()?);
                    }
                    self.sym(")")?;
                }
                let mut qubits = vec![self.indexed(true)?];
                while self.eat(",") {
                    qubits.push(self.indexed(true)?);
                }
                self.sym(";")?;
                let gate = Gate::from_name(name, &params).map_err(|e| QasmError::Syntax {
                    line,
                    message: e.to_string(),
                })?;
                b.push(Instruction::Gate { gate, qubits });
            }
        }
        Ok(())
    }
}

/// Parse text written by [`to_qasm`] (or any program in the same subset).
pub fn from_qasm(src: &str) -> Result<Circuit, QasmError> {
    let mut name = None;
    let mut params = Vec::new();
    let mut system = None;
    for (i, line) in src.lines().enumerate() {
        let Some(meta) = line.trim().strip_prefix("// @") else {
            continue;
        };
        let bad = |what: &str| QasmError::Syntax {
            line: i + 1,
            message: format!("malformed @{what} comment"),
        };
        let (key, rest) = meta.split_once(' ').unwrap_or((meta, ""));
        match key {
            "name" => name = Some(rest.trim().to_string()),
            "param" => {
                let (k, v) = rest.trim().split_once(' ').ok_or_else(|| bad("param"))?;
                params.push((
                    k.to_string(),
                    v.trim().parse::<f64>().map_err(|_| bad("param"))?,
                ));
            }
            "system" => {
                let qs: Result<Vec<usize>, _> = rest.split_whitespace().map(str::parse).collect();
                system = Some(qs.map_err(|_| bad("system"))?);
            }
            _ => {}
        }
    }

    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        qreg: None,
        creg: None,
    };
    let mut insts = Vec::new();
    while p.peek().is_some() {
        match p.peek() {
            Some(Tok::Ident(s)) if s == "OPENQASM" => {
                p.pos += 1;
                let _ = p.next()?;
                p.sym(";")?;
            }
            Some(Tok::Ident(s)) if s == "include" => {
                p.pos += 1;
                match p.next()? {
                    Tok::Str(f) if f == "stdgates.inc" => {}
                    other => return Err(QasmError::Unsupported(format!("include {other:?}"))),
                }
                p.sym(";")?;
            }
            Some(Tok::Ident(s)) if s == "qubit" || s == "bit" => {
                let quantum = s == "qubit";
                p.pos += 1;
                p.sym("[")?;
                let size = p.int()?;
                p.sym("]")?;
                let reg = p.ident()?;
                p.sym(";")?;
                let slot = if quantum { &mut p.qreg } else { &mut p.creg };
                if slot.is_some() {
                    return Err(QasmError::Unsupported(
                        "more than one register of a kind".into(),
                    ));
                }
                *slot = Some((reg, size));
            }
            _ => p.statement(&mut insts, false)?,
        }
    }
    let (Some((_, nq)), Some((_, nc))) = (&p.qreg, &p.creg) else {
        return Err(QasmError::Syntax {
            line: 0,
            message: "missing qubit or bit declaration".into(),
        });
    };
    let mut b = CircuitBuilder::new(*nq, *nc)?;
    for inst in insts {
        b.push(inst)?;
    }
    if let Some(n) = name {
        b.name(&n);
    }
    for (k, v) in params {
        b.param(&k, v);
    }
    if let Some(s) = system {
        b.system_qubits(s);
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parity_example;

    #[test]
    fn parity_example_has_one_if_block() {
        let text = to_qasm(&parity_example());
        assert_eq!(text.matches("if (").count(), 1);
        assert!(text.contains("if (c == 1) {"));
        assert_eq!(from_qasm(&text).unwrap(), parity_example());
    }

    #[test]
    fn parity_and_partial_equality_roundtrip() {
        let mut b = CircuitBuilder::new(3, 3).unwrap();
        b.rz(-1.25e-7, 0)
            .unwrap()
            .measure(0, 0)
            .unwrap()
            .measure(1, 2)
            .unwrap();
        b.conditional(Condition::parity(&[0, 2], true).unwrap(), |body| {
            body.x(2).map(|_| ())
        })
        .unwrap();
        b.conditional(Condition::equals_str(&[2, 0], "10").unwrap(), |body| {
            body.rzz(0.5, 0, 1).map(|_| ())
        })
        .unwrap();
        b.name("mixed").param("theta", 0.1);
        let c = b.build().unwrap();
        let text = to_qasm(&c);
        assert!(text.contains("// @parity\nif ((c[0] ^ c[2]) == 1) {"));
        assert!(text.contains("if (c[2] == 1 && c[0] == 0) {"));
        let back = from_qasm(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(to_qasm(&back), text);
    }

    #[test]
    fn accepts_arrow_measure_and_rejects_junk() {
        let src = "OPENQASM 3;\nqubit[1] r;\nbit[1] m;\nh r[0];\nmeasure r[0] -> m[0];\n";
        let c = from_qasm(src).unwrap();
        assert_eq!(c.instructions().len(), 2);
        assert!(from_qasm("qubit[1] q;\nbit[1] c;\nccx q[0];\n").is_err());
        assert!(from_qasm("qubit[1] q;\nbit[1] c;\nh q[3];\n").is_err());
        assert!(from_qasm("qubit[1] q;\nbit[1] c;\nwhile (c == 0) { h q[0]; }\n").is_err());
    }
}
