use super::{FrjtError, HaltState, Instruction, Program, NUM_REGISTERS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub halt_state: HaltState,
    /// One entry per instruction; `true` if it executed.
    pub executed_mask: Vec<bool>,
    pub step_count: usize,
}

impl ExecutionResult {
    /// Fraction of instructions that executed.
    pub fn coverage(&self) -> f64 {
        if self.executed_mask.is_empty() {
            return 0.0;
        }
        self.executed_mask.iter().filter(|&&e| e).count() as f64 / self.executed_mask.len() as f64
    }
}

/// Runs `program` from its first instruction until a `HALT`.
///
/// Registers start at zero and use wrapping 8-bit arithmetic. Jumps must
/// land strictly after the jumping instruction, which bounds the run to one
/// pass over the text.
pub fn interpret(program: &Program) -> Result<ExecutionResult, FrjtError> {
    let labels = program.label_positions()?;
    let code = &program.instructions;
    let mut regs = [0u8; NUM_REGISTERS];
    let mut executed = vec![false; code.len()];
    let mut steps = 0usize;
    let mut pc = 0usize;

    let reg = |r: super::Reg| -> Result<usize, FrjtError> {
        let i = r.0 as usize;
        if i < NUM_REGISTERS {
            Ok(i)
        } else {
            Err(FrjtError::BadRegister(r.0))
        }
    };

    while pc < code.len() {
        debug_assert!(!executed[pc], "instruction {pc} executed twice");
        executed[pc] = true;
        steps += 1;
        let jump = match code[pc] {
            Instruction::Load { dst, imm } => {
                regs[reg(dst)?] = imm;
                None
            }
            Instruction::Add { dst, src } => {
                let d = reg(dst)?;
                regs[d] = regs[d].wrapping_add(regs[reg(src)?]);
                None
            }
            Instruction::Sub { dst, src } => {
                let d = reg(dst)?;
                regs[d] = regs[d].wrapping_sub(regs[reg(src)?]);
                None
            }
            Instruction::Jz { reg: r, target } => (regs[reg(r)?] == 0).then_some(target),
            Instruction::Jnz { reg: r, target } => (regs[reg(r)?] != 0).then_some(target),
            Instruction::Jmp { target } => Some(target),
            Instruction::Label(_) => None,
            Instruction::Halt(state) => {
                return Ok(ExecutionResult {
                    halt_state: state,
                    executed_mask: executed,
                    step_count: steps,
                })
            }
        };
        pc = match jump {
            None => pc + 1,
            Some(label) => {
                let dest = *labels
                    .get(&label)
                    .ok_or(FrjtError::UndefinedLabel { at: pc, label })?;
                if dest <= pc {
                    return Err(FrjtError::BackwardJump { at: pc, label });
                }
                dest
            }
        };
    }
    Err(FrjtError::FellOffEnd(code.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frjt::{Label, Reg};

    fn prog(imm: u8) -> Program {
        Program::new(
            vec![
                Instruction::Load { dst: Reg(0), imm },
                Instruction::Jz {
                    reg: Reg(0),
                    target: Label(1),
                },
                Instruction::Halt(HaltState::A),
                Instruction::Label(Label(1)),
                Instruction::Halt(HaltState::B),
            ],
            0,
        )
    }

    #[test]
    fn zero_register_takes_the_jump() {
        let r = interpret(&prog(0)).unwrap();
        assert_eq!(r.halt_state, HaltState::B);
        assert_eq!(r.executed_mask, vec![true, true, false, true, true]);
        assert_eq!(r.step_count, 4);
    }

    #[test]
    fn nonzero_register_falls_through() {
        let r = interpret(&prog(3)).unwrap();
        assert_eq!(r.halt_state, HaltState::A);
        assert_eq!(r.executed_mask, vec![true, true, true, false, false]);
        assert!((r.coverage() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_wraps_at_eight_bits() {
        let p = Program::new(
            vec![
                Instruction::Load { dst: Reg(0), imm: 1 },
                Instruction::Sub {
                    dst: Reg(1),
                    src: Reg(0),
                },
                Instruction::Add {
                    dst: Reg(1),
                    src: Reg(0),
                },
                Instruction::Jnz {
                    reg: Reg(1),
                    target: Label(0),
                },
                Instruction::Halt(HaltState::A),
                Instruction::Label(Label(0)),
                Instruction::Halt(HaltState::B),
            ],
            0,
        );
        // 0 - 1 = 255, 255 + 1 = 0
        assert_eq!(interpret(&p).unwrap().halt_state, HaltState::A);
    }

    #[test]
    fn falling_off_the_end_is_an_error() {
        let p = Program::new(vec![Instruction::Load { dst: Reg(0), imm: 1 }], 0);
        assert!(matches!(interpret(&p), Err(FrjtError::FellOffEnd(1))));
    }
}
