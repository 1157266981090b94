//! Turning an old/new file pair into editor keystrokes.
//!
//! Planning runs against a private copy of the editor so every seek is
//! computed from the cursor the real session will have.

use crate::diff::{diff_chars, diff_lines, LineEdit};
use crate::termemu::{Action, Control, Editor, Mode};

/// Keystrokes realizing one file edit, plus where the cursor went.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditPlan {
    pub actions: Vec<Action>,
    /// Cursor after each action.
    pub cursor_path: Vec<(usize, usize)>,
}

struct Planner {
    ed: Editor,
    plan: EditPlan,
}

impl Planner {
    fn push(&mut self, a: Action) {
        self.ed.apply(&a);
        self.plan.cursor_path.push(self.ed.cursor());
        self.plan.actions.push(a);
    }

    fn push_n(&mut self, c: Control, n: usize) {
        for _ in 0..n {
            self.push(Action::Control(c.clone()));
        }
    }

    fn type_str(&mut self, s: impl IntoIterator<Item = char>) {
        for ch in s {
            self.push(Action::Insert(ch));
        }
    }

    fn backspaces(&mut self, n: usize) {
        for _ in 0..n {
            self.push(Action::Backspace);
        }
    }

    fn seek(&mut self, row: usize, col: usize) {
        let page = self.ed.view_rows();
        while self.ed.cursor().0 >= row + page {
            self.push(Action::Control(Control::PageUp));
        }
        while row >= self.ed.cursor().0 + page {
            self.push(Action::Control(Control::PageDown));
        }
        let r = self.ed.cursor().0;
        if r > row {
            self.push_n(Control::Up, r - row);
        } else {
            self.push_n(Control::Down, row - r);
        }
        let c = self.ed.cursor().1;
        let len = self.ed.line_len(row);
        let direct = c.abs_diff(col);
        let via_home = 1 + col;
        let via_end = 1 + (len - col);
        if direct <= via_home && direct <= via_end {
            if c > col {
                self.push_n(Control::Left, c - col);
            } else {
                self.push_n(Control::Right, col - c);
            }
        } else if via_home <= via_end {
            self.push(Action::Control(Control::Home));
            self.push_n(Control::Right, col);
        } else {
            self.push(Action::Control(Control::End));
            self.push_n(Control::Left, len - col);
        }
        debug_assert_eq!(self.ed.cursor(), (row, col));
    }

    fn edit_line(&mut self, row: usize, new: &str) {
        let old: Vec<char> = self.ed.lines()[row].clone();
        let new: Vec<char> = new.chars().collect();
        let mut delta: isize = 0;
        for e in diff_chars(&old, &new) {
            let start = (e.old_start as isize + delta) as usize;
            self.seek(row, start + e.old_len);
            self.backspaces(e.old_len);
            self.type_str(e.new.iter().copied());
            delta += e.new.len() as isize - e.old_len as isize;
        }
    }

    fn delete_lines(&mut self, start: usize, count: usize) {
        let chars: usize = self.ed.lines()[start..start + count].iter().map(Vec::len).sum();
        let last = start + count - 1;
        if start > 0 {
            self.seek(last, self.ed.line_len(last));
            self.backspaces(chars + count);
        } else if count < self.ed.lines().len() {
            self.seek(count, 0);
            self.backspaces(chars + count);
        } else {
            // The buffer cannot lose its only line; the mismatch this leaves
            // sends the caller to the rewrite fallback.
            self.seek(last, self.ed.line_len(last));
            self.backspaces(chars + count - 1);
        }
    }

    fn insert_lines(&mut self, at: usize, lines: &[String]) {
        if at < self.ed.lines().len() {
            self.seek(at, 0);
            for l in lines {
                self.type_str(l.chars());
                self.push(Action::Insert('\n'));
            }
        } else {
            let last = at - 1;
            self.seek(last, self.ed.line_len(last));
            for l in lines {
                self.push(Action::Insert('\n'));
                self.type_str(l.chars());
            }
        }
    }

    fn hunk(&mut self, e: &LineEdit) {
        let r = e.new_start;
        let new_len = e.new_lines.len();
        let pair = e.old_len.min(new_len);
        for j in 0..pair {
            self.edit_line(r + j, &e.new_lines[j]);
        }
        if e.old_len > pair {
            self.delete_lines(r + pair, e.old_len - pair);
        }
        if new_len > pair {
            self.insert_lines(r + pair, &e.new_lines[pair..]);
        }
    }
}

/// Plans the keystrokes turning the editor's buffer into `new`. The editor
/// must be in normal mode; the plan enters insert mode and leaves it again.
/// An unchanged buffer yields an empty plan.
pub fn plan_actions(editor: &Editor, new: &str) -> EditPlan {
    let old = editor.text();
    let mut p = Planner {
        ed: editor.clone(),
        plan: EditPlan { actions: Vec::new(), cursor_path: Vec::new() },
    };
    if old == new {
        return p.plan;
    }
    debug_assert_eq!(editor.mode, Mode::Normal);
    p.push(Action::Control(Control::ToggleMode));
    for e in diff_lines(&old, new) {
        p.hunk(&e);
    }
    p.push(Action::Control(Control::ToggleMode));
    if p.ed.text() != new {
        return rewrite_plan(editor, new);
    }
    p.plan
}

/// Fallback: clear the buffer and type the new content.
fn rewrite_plan(editor: &Editor, new: &str) -> EditPlan {
    let mut p = Planner {
        ed: editor.clone(),
        plan: EditPlan { actions: Vec::new(), cursor_path: Vec::new() },
    };
    p.push(Action::Control(Control::ToggleMode));
    let last = p.ed.lines().len() - 1;
    p.seek(last, p.ed.line_len(last));
    let total = p.ed.text().chars().count();
    p.backspaces(total);
    p.type_str(new.chars());
    p.push(Action::Control(Control::ToggleMode));
    p.plan
}
