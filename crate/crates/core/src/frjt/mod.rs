//! Forward-Referencing Jumps Task: straight-line register programs whose
//! only control flow is forward jumps, so the halt state can only be known by
//! evaluating the program instruction by instruction.

mod dataset;
mod generate;
mod interp;
mod serial;

pub use dataset::{emit_frjt_dataset, generate_records, DatasetStats, FrjtDatasetConfig, FrjtRecord};
pub use generate::{generate_program, generate_program_with, GeneratorConfig};
pub use interp::{interpret, ExecutionResult};
pub use serial::token_vocabulary;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Number of registers in the machine (`R1`..`R4`).
pub const NUM_REGISTERS: usize = 4;

#[derive(Debug, Error)]
pub enum FrjtError {
    #[error("program fell off the end at instruction {0} without halting")]
    FellOffEnd(usize),
    #[error("jump at instruction {at} references undefined label {label}")]
    UndefinedLabel { at: usize, label: Label },
    #[error("label {0} defined more than once")]
    DuplicateLabel(Label),
    #[error("jump at instruction {at} to {label} is not forward")]
    BackwardJump { at: usize, label: Label },
    #[error("register index {0} out of range")]
    BadRegister(u8),
    #[error("program lacks a HALT {0}")]
    MissingHalt(HaltState),
    #[error("depth {depth} does not match {labels} labels")]
    DepthMismatch { depth: usize, labels: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid dataset config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Zero-based register index, printed one-based (`R1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg(pub u8);

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltState {
    A,
    B,
}

impl HaltState {
    pub fn flipped(self) -> HaltState {
        match self {
            HaltState::A => HaltState::B,
            HaltState::B => HaltState::A,
        }
    }
}

impl fmt::Display for HaltState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltState::A => "A",
            HaltState::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Load { dst: Reg, imm: u8 },
    Add { dst: Reg, src: Reg },
    Sub { dst: Reg, src: Reg },
    Jz { reg: Reg, target: Label },
    Jnz { reg: Reg, target: Label },
    Jmp { target: Label },
    Label(Label),
    Halt(HaltState),
}

impl Instruction {
    pub fn jump_target(&self) -> Option<Label> {
        match *self {
            Instruction::Jz { target, .. }
            | Instruction::Jnz { target, .. }
            | Instruction::Jmp { target } => Some(target),
            _ => None,
        }
    }

    fn registers(&self) -> impl Iterator<Item = Reg> {
        let (a, b) = match *self {
            Instruction::Load { dst, .. } => (Some(dst), None),
            Instruction::Add { dst, src } | Instruction::Sub { dst, src } => (Some(dst), Some(src)),
            Instruction::Jz { reg, .. } | Instruction::Jnz { reg, .. } => (Some(reg), None),
            _ => (None, None),
        };
        a.into_iter().chain(b)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Load { dst, imm } => write!(f, "LOAD {dst} {imm}"),
            Instruction::Add { dst, src } => write!(f, "ADD {dst} {src}"),
            Instruction::Sub { dst, src } => write!(f, "SUB {dst} {src}"),
            Instruction::Jz { reg, target } => write!(f, "JZ {reg} {target}"),
            Instruction::Jnz { reg, target } => write!(f, "JNZ {reg} {target}"),
            Instruction::Jmp { target } => write!(f, "JMP {target}"),
            Instruction::Label(l) => write!(f, "LABEL {l}"),
            Instruction::Halt(s) => write!(f, "HALT {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    /// Number of `LABEL` instructions.
    pub depth: usize,
    pub seed: u64,
}

impl Program {
    /// Builds a program, computing its depth from the label count.
    pub fn new(instructions: Vec<Instruction>, seed: u64) -> Program {
        let depth = instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Label(_)))
            .count();
        Program {
            instructions,
            depth,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Instruction index of every label definition.
    pub fn label_positions(&self) -> Result<HashMap<Label, usize>, FrjtError> {
        let mut pos = HashMap::new();
        for (i, ins) in self.instructions.iter().enumerate() {
            if let Instruction::Label(l) = ins {
                if pos.insert(*l, i).is_some() {
                    return Err(FrjtError::DuplicateLabel(*l));
                }
            }
        }
        Ok(pos)
    }

    /// Checks every structural invariant: unique labels, defined forward
    /// targets, valid registers, matching depth and both halt states present.
    pub fn validate(&self) -> Result<(), FrjtError> {
        let pos = self.label_positions()?;
        if pos.len() != self.depth {
            return Err(FrjtError::DepthMismatch {
                depth: self.depth,
                labels: pos.len(),
            });
        }
        for (i, ins) in self.instructions.iter().enumerate() {
            if let Some(r) = ins.registers().find(|r| r.0 as usize >= NUM_REGISTERS) {
                return Err(FrjtError::BadRegister(r.0));
            }
            if let Some(label) = ins.jump_target() {
                match pos.get(&label) {
                    None => return Err(FrjtError::UndefinedLabel { at: i, label }),
                    Some(&p) if p <= i => return Err(FrjtError::BackwardJump { at: i, label }),
                    _ => {}
                }
            }
        }
        for state in [HaltState::A, HaltState::B] {
            if !self.instructions.contains(&Instruction::Halt(state)) {
                return Err(FrjtError::MissingHalt(state));
            }
        }
        Ok(())
    }

    /// Swaps every `HALT A` with `HALT B`. Control flow is untouched, so the
    /// interpreted halt state flips.
    pub fn flip_halts(&mut self) {
        for ins in &mut self.instructions {
            if let Instruction::Halt(s) = ins {
                *s = s.flipped();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u8) -> Reg {
        Reg(n - 1)
    }

    #[test]
    fn validate_rejects_backward_and_undefined_jumps() {
        let back = Program::new(
            vec![
                Instruction::Label(Label(0)),
                Instruction::Jmp { target: Label(0) },
                Instruction::Halt(HaltState::A),
                Instruction::Halt(HaltState::B),
            ],
            0,
        );
        assert!(matches!(
            back.validate(),
            Err(FrjtError::BackwardJump {
                at: 1,
                label: Label(0)
            })
        ));
        let undefined = Program::new(
            vec![
                Instruction::Jz {
                    reg: r(1),
                    target: Label(3),
                },
                Instruction::Halt(HaltState::A),
                Instruction::Halt(HaltState::B),
            ],
            0,
        );
        assert!(matches!(
            undefined.validate(),
            Err(FrjtError::UndefinedLabel { .. })
        ));
    }

    #[test]
    fn flip_halts_swaps_states() {
        let mut p = Program::new(
            vec![
                Instruction::Halt(HaltState::A),
                Instruction::Halt(HaltState::B),
            ],
            0,
        );
        p.flip_halts();
        assert_eq!(p.instructions[0], Instruction::Halt(HaltState::B));
        assert_eq!(p.instructions[1], Instruction::Halt(HaltState::A));
    }
}
