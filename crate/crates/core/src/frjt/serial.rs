//! Text forms of a program.
//!
//! The listing form is one instruction per line (`JZ R2 L3`), optionally
//! preceded by a `# seed=N` line. The token form is a single line of
//! space-separated tokens from a closed vocabulary, with `;` ending each
//! instruction and immediates spelled digit by digit (`LOAD R1 8 0 ;`).

use std::fmt::Write as _;

use super::{FrjtError, HaltState, Instruction, Label, Program, Reg, NUM_REGISTERS};

const SEP: &str = ";";

/// The closed token vocabulary for programs with at most `max_labels` labels.
pub fn token_vocabulary(max_labels: usize) -> Vec<String> {
    let mut v: Vec<String> = ["LOAD", "ADD", "SUB", "JZ", "JNZ", "JMP", "LABEL", "HALT", "A", "B", SEP]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend((1..=NUM_REGISTERS).map(|r| format!("R{r}")));
    v.extend((0..max_labels).map(|l| format!("L{l}")));
    v.extend((0..10).map(|d| d.to_string()));
    v
}

impl Program {
    pub fn to_listing(&self) -> String {
        let mut s = format!("# seed={}\n", self.seed);
        for ins in &self.instructions {
            let _ = writeln!(s, "{ins}");
        }
        s
    }

    pub fn parse_listing(text: &str) -> Result<Program, FrjtError> {
        let mut seed = 0;
        let mut code = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("seed=") {
                    seed = v.parse().map_err(|_| perr(n + 1, "bad seed"))?;
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            code.push(parse_instruction(&toks, n + 1, false)?);
        }
        Ok(Program::new(code, seed))
    }

    pub fn to_tokens(&self) -> String {
        let mut s = String::new();
        for ins in &self.instructions {
            let text = ins.to_string();
            let mut parts = text.split(' ');
            let op = parts.next().unwrap_or_default();
            s.push_str(op);
            for p in parts {
                s.push(' ');
                if p.bytes().all(|b| b.is_ascii_digit()) {
                    for (i, d) in p.chars().enumerate() {
                        if i > 0 {
                            s.push(' ');
                        }
                        s.push(d);
                    }
                } else {
                    s.push_str(p);
                }
            }
            s.push(' ');
            s.push_str(SEP);
            s.push(' ');
        }
        s.truncate(s.trim_end().len());
        s
    }

    pub fn parse_tokens(stream: &str, seed: u64) -> Result<Program, FrjtError> {
        let toks: Vec<&str> = stream.split_whitespace().collect();
        let mut code = Vec::new();
        for (n, group) in toks.split(|t| *t == SEP).enumerate() {
            if group.is_empty() {
                continue;
            }
            code.push(parse_instruction(group, n + 1, true)?);
        }
        Ok(Program::new(code, seed))
    }
}

fn perr(line: usize, msg: &str) -> FrjtError {
    FrjtError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn parse_reg(t: &str, line: usize) -> Result<Reg, FrjtError> {
    let n: u8 = t
        .strip_prefix('R')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| perr(line, &format!("expected register, got {t:?}")))?;
    if n == 0 || n as usize > NUM_REGISTERS {
        return Err(perr(line, &format!("register {t} out of range")));
    }
    Ok(Reg(n - 1))
}

fn parse_label(t: &str, line: usize) -> Result<Label, FrjtError> {
    t.strip_prefix('L')
        .and_then(|d| d.parse().ok())
        .map(Label)
        .ok_or_else(|| perr(line, &format!("expected label, got {t:?}")))
}

fn parse_imm(toks: &[&str], line: usize, split_digits: bool) -> Result<u8, FrjtError> {
    let text: String = if split_digits {
        if toks.iter().any(|t| t.len() != 1) {
            return Err(perr(line, "immediate digits must be single tokens"));
        }
        toks.concat()
    } else {
        match toks {
            [t] => t.to_string(),
            _ => return Err(perr(line, "expected one immediate")),
        }
    };
    text.parse()
        .map_err(|_| perr(line, &format!("bad immediate {text:?}")))
}

fn parse_instruction(toks: &[&str], line: usize, split_digits: bool) -> Result<Instruction, FrjtError> {
    let (op, args) = toks.split_first().ok_or_else(|| perr(line, "empty instruction"))?;
    let arity = |n: usize| -> Result<(), FrjtError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(perr(line, &format!("{op} takes {n} operands")))
        }
    };
    Ok(match *op {
        "LOAD" => {
            if args.len() < 2 {
                return Err(perr(line, "LOAD takes a register and an immediate"));
            }
            Instruction::Load {
                dst: parse_reg(args[0], line)?,
                imm: parse_imm(&args[1..], line, split_digits)?,
            }
        }
        "ADD" | "SUB" => {
            arity(2)?;
            let dst = parse_reg(args[0], line)?;
            let src = parse_reg(args[1], line)?;
            if *op == "ADD" {
                Instruction::Add { dst, src }
            } else {
                Instruction::Sub { dst, src }
            }
        }
        "JZ" | "JNZ" => {
            arity(2)?;
            let reg = parse_reg(args[0], line)?;
            let target = parse_label(args[1], line)?;
            if *op == "JZ" {
                Instruction::Jz { reg, target }
            } else {
                Instruction::Jnz { reg, target }
            }
        }
        "JMP" => {
            arity(1)?;
            Instruction::Jmp {
                target: parse_label(args[0], line)?,
            }
        }
        "LABEL" => {
            arity(1)?;
            Instruction::Label(parse_label(args[0], line)?)
        }
        "HALT" => {
            arity(1)?;
            Instruction::Halt(match args[0] {
                "A" => HaltState::A,
                "B" => HaltState::B,
                other => return Err(perr(line, &format!("bad halt state {other:?}"))),
            })
        }
        other => return Err(perr(line, &format!("unknown opcode {other:?}"))),
    })
}
