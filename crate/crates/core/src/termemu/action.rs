//! The action alphabet: single characters plus a fixed set of xterm-style
//! escape sequences.

use std::fmt;

use super::TermError;

pub const ESC: char = '\u{1b}';
pub const BACKSPACE: char = '\u{7f}';

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Control {
    Up,
    Down,
    Left,
    Right,
    Home,
    End,
    PageUp,
    PageDown,
    /// Switches between insert and normal mode.
    ToggleMode,
    Save,
    TreeUp,
    TreeDown,
    /// Opens the highlighted tree entry.
    TreeEnter,
    /// Switches between the editor and the shell.
    ToggleFocus,
    /// Opens (or creates) a file by path.
    Open(String),
}

const FIXED: &[(Control, &str)] = &[
    (Control::Up, "\x1b[A"),
    (Control::Down, "\x1b[B"),
    (Control::Right, "\x1b[C"),
    (Control::Left, "\x1b[D"),
    (Control::Home, "\x1b[H"),
    (Control::End, "\x1b[F"),
    (Control::PageUp, "\x1b[5~"),
    (Control::PageDown, "\x1b[6~"),
    (Control::ToggleMode, "\x1b[2~"),
    (Control::Save, "\x1b[115;5u"),
    (Control::TreeUp, "\x1b[1;3A"),
    (Control::TreeDown, "\x1b[1;3B"),
    (Control::TreeEnter, "\x1b[13;3u"),
    (Control::ToggleFocus, "\x1b[9;5u"),
];

const OPEN_PREFIX: &str = "\x1b]1337;open=";
const OPEN_SUFFIX: char = '\u{7}';

/// One editor input: a typed character, delete-backward, or a control
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Insert(char),
    Backspace,
    Control(Control),
}

impl Action {
    pub fn parse(payload: &str) -> Result<Action, TermError> {
        let unsupported = || TermError::UnsupportedAction(payload.escape_debug().to_string());
        let mut chars = payload.chars();
        let first = chars.next().ok_or_else(unsupported)?;
        if first != ESC {
            if chars.next().is_some() || first == '\0' {
                return Err(unsupported());
            }
            return Ok(if first == BACKSPACE {
                Action::Backspace
            } else {
                Action::Insert(first)
            });
        }
        if let Some((c, _)) = FIXED.iter().find(|(_, s)| *s == payload) {
            return Ok(Action::Control(c.clone()));
        }
        if let Some(rest) = payload.strip_prefix(OPEN_PREFIX) {
            if let Some(path) = rest.strip_suffix(OPEN_SUFFIX) {
                if !path.is_empty() && !path.contains(['\0', OPEN_SUFFIX, ESC, '\n']) {
                    return Ok(Action::Control(Control::Open(path.to_string())));
                }
            }
        }
        Err(unsupported())
    }

    pub fn parse_bytes(bytes: &[u8]) -> Result<Action, TermError> {
        let s = std::str::from_utf8(bytes)
            .map_err(|_| TermError::UnsupportedAction(String::from_utf8_lossy(bytes).into_owned()))?;
        Action::parse(s)
    }

    pub fn encode(&self) -> String {
        match self {
            Action::Insert(c) => c.to_string(),
            Action::Backspace => BACKSPACE.to_string(),
            Action::Control(Control::Open(p)) => format!("{OPEN_PREFIX}{p}{OPEN_SUFFIX}"),
            Action::Control(c) => FIXED
                .iter()
                .find(|(k, _)| k == c)
                .map(|(_, s)| s.to_string())
                .expect("every fixed control has an encoding"),
        }
    }

    pub fn is_control(&self) -> bool {
        matches!(self, Action::Control(_))
    }

    /// Actions that type `text` character by character.
    pub fn type_text(text: &str) -> impl Iterator<Item = Action> + '_ {
        text.chars().map(Action::Insert)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode().escape_debug())
    }
}

/// Characters a file may contain and still be replayed through the editor.
pub fn is_typeable(ch: char) -> bool {
    !matches!(ch, '\0' | ESC | BACKSPACE)
}
