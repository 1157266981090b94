//! The composed terminal: state, action dispatch and rendering.
//!
//! `render` always produces the full frame from scratch. `apply_action`
//! keeps a cached frame and redraws only rows whose content may have
//! changed; whenever anything that shifts the layout moves, it falls back
//! to a full redraw.

use super::action::{is_typeable, Action, Control};
use super::editor::{Editor, Mode, Touched};
use super::frame::{Cell, Color, Frame, Style};
use super::shell::{Shell, ShellEffect, PROMPT};
use super::vfs::{tree_entries, TreeEntry, Vfs};
use super::TermError;

const MIN_WIDTH: u16 = 16;
const MIN_HEIGHT: u16 = 2;

const SEPARATOR: char = '\u{2502}';
const TREE_STYLE: Style = Style::new(Color::Cyan, Color::Default);
const DIR_STYLE: Style = Style::new(Color::Blue, Color::Default).bold();
const GUTTER_STYLE: Style = Style::new(Color::Yellow, Color::Default);
const FILLER_STYLE: Style = Style::new(Color::Blue, Color::Default);
const STATUS_STYLE: Style = Style::PLAIN.inverse();

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Focus {
    Editor,
    Shell,
}

/// Pane geometry derived from the frame size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub tree_width: usize,
    pub editor_x: usize,
    pub editor_width: usize,
    /// Rows above the status line.
    pub body_rows: usize,
}

impl Layout {
    fn new(width: u16, height: u16) -> Layout {
        let (w, h) = (width as usize, height as usize);
        let tree_width = (w / 5).clamp(4, 40);
        Layout {
            width: w,
            height: h,
            tree_width,
            editor_x: tree_width + 1,
            editor_width: w - tree_width - 1,
            body_rows: h - 1,
        }
    }
}

/// Everything whose change forces a full redraw.
#[derive(Debug, Clone, PartialEq, Eq)]
struct LayoutKey {
    scroll: usize,
    hscroll: usize,
    gutter: usize,
    path: Option<String>,
    focus: Focus,
    tree_scroll: usize,
    tree_gen: u64,
    scrollback: usize,
}

#[derive(Debug, Clone)]
pub struct Session {
    layout: Layout,
    vfs: Vfs,
    editor: Editor,
    shell: Shell,
    focus: Focus,
    tree: Vec<TreeEntry>,
    tree_gen: u64,
    highlight: Option<usize>,
    tree_scroll: usize,
    frame: Frame,
}

/// Whether bytes can be loaded into the editor and typed back verbatim.
pub fn is_text(bytes: &[u8]) -> bool {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.chars().all(is_typeable),
        Err(_) => false,
    }
}

impl Session {
    pub fn new(width: u16, height: u16) -> Result<Session, TermError> {
        Session::with_vfs(width, height, Vfs::default())
    }

    pub fn with_vfs(width: u16, height: u16, vfs: Vfs) -> Result<Session, TermError> {
        if width < MIN_WIDTH || height < MIN_HEIGHT {
            return Err(TermError::Geometry { width, height });
        }
        let layout = Layout::new(width, height);
        let mut s = Session {
            layout,
            vfs,
            editor: Editor::new(layout.editor_width, layout.body_rows),
            shell: Shell::default(),
            focus: Focus::Editor,
            tree: Vec::new(),
            tree_gen: 0,
            highlight: None,
            tree_scroll: 0,
            frame: Frame::new(width, height)?,
        };
        s.rebuild_tree();
        s.frame = s.render();
        Ok(s)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn vfs(&self) -> &Vfs {
        &self.vfs
    }

    pub fn editor(&self) -> &Editor {
        &self.editor
    }

    pub fn shell(&self) -> &Shell {
        &self.shell
    }

    pub fn focus(&self) -> Focus {
        self.focus
    }

    pub fn tree(&self) -> &[TreeEntry] {
        &self.tree
    }

    pub fn highlighted(&self) -> Option<&TreeEntry> {
        self.highlight.map(|i| &self.tree[i])
    }

    /// The incrementally maintained frame.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Applies one action and refreshes the cached frame.
    pub fn apply_action(&mut self, action: &Action) -> Result<(), TermError> {
        let before = self.layout_key();
        let mut rows = Vec::with_capacity(4);
        rows.push(self.cursor_screen_row());
        rows.extend(self.highlight_screen_row());
        let mut full = false;

        match self.dispatch(action)? {
            Some(t) => {
                full |= t.all;
                let scroll = self.editor.scroll();
                rows.extend(t.lines.iter().filter_map(|&l| l.checked_sub(scroll)));
            }
            None => full = true,
        }

        rows.push(self.cursor_screen_row());
        rows.extend(self.highlight_screen_row());
        if full || self.layout_key() != before {
            self.frame = self.render();
        } else {
            let mut frame = std::mem::replace(&mut self.frame, Frame::placeholder());
            for y in rows {
                if y < self.layout.body_rows {
                    self.draw_body_row(&mut frame, y);
                }
            }
            self.draw_status(&mut frame);
            self.frame = frame;
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, actions: impl IntoIterator<Item = &'a Action>) -> Result<(), TermError> {
        for a in actions {
            self.apply_action(a)?;
        }
        Ok(())
    }

    /// Mutates state. Returns the touched editor lines, or `None` when the
    /// whole screen must be redrawn.
    fn dispatch(&mut self, action: &Action) -> Result<Option<Touched>, TermError> {
        let none = Touched::default();
        match action {
            Action::Insert(c) if !is_typeable(*c) => Err(TermError::UnsupportedAction(c.escape_debug().to_string())),
            Action::Insert('\n') if self.focus == Focus::Shell => {
                if let ShellEffect::Removed(path) = self.shell.enter(&mut self.vfs) {
                    if self.editor.path.as_deref() == Some(path.as_str()) {
                        self.editor.close();
                    }
                    self.rebuild_tree();
                }
                Ok(None)
            }
            Action::Insert(c) if self.focus == Focus::Shell => {
                self.shell.type_char(*c);
                Ok(Some(none))
            }
            Action::Backspace if self.focus == Focus::Shell => {
                self.shell.backspace();
                Ok(Some(none))
            }
            Action::Control(c) if self.focus == Focus::Shell => self.control(c),
            _ => match self.editor.apply(action) {
                Some(t) => Ok(Some(t)),
                None => match action {
                    Action::Control(c) => self.control(c),
                    _ => unreachable!("the editor handles every non-control action"),
                },
            },
        }
    }

    fn control(&mut self, c: &Control) -> Result<Option<Touched>, TermError> {
        let none = Touched::default();
        Ok(Some(match c {
            Control::Save => {
                if let Some(path) = self.editor.path.clone() {
                    let created = self.vfs.write(&path, self.editor.text().into_bytes());
                    self.editor.dirty = false;
                    if created {
                        self.rebuild_tree();
                        self.highlight_path(&path);
                        return Ok(None);
                    }
                }
                none
            }
            Control::TreeUp => {
                if let Some(h) = self.highlight {
                    self.set_highlight(h.saturating_sub(1));
                }
                none
            }
            Control::TreeDown => {
                if let Some(h) = self.highlight {
                    self.set_highlight((h + 1).min(self.tree.len() - 1));
                }
                none
            }
            Control::TreeEnter => {
                match self.highlighted() {
                    Some(e) if !e.is_dir => {
                        let path = e.path.clone();
                        self.open(&path)?;
                    }
                    _ => {}
                }
                return Ok(None);
            }
            Control::Open(path) => {
                self.open(path)?;
                return Ok(None);
            }
            Control::ToggleFocus => {
                self.focus = match self.focus {
                    Focus::Editor => Focus::Shell,
                    Focus::Shell => Focus::Editor,
                };
                return Ok(None);
            }
            // Navigation while the shell has focus does nothing.
            _ => none,
        }))
    }

    fn open(&mut self, path: &str) -> Result<(), TermError> {
        let text = match self.vfs.get(path) {
            Some(bytes) if !is_text(bytes) => return Err(TermError::NotText(path.to_string())),
            Some(bytes) => std::str::from_utf8(bytes).expect("checked by is_text").to_string(),
            None => String::new(),
        };
        self.editor.load(path, &text);
        self.focus = Focus::Editor;
        self.highlight_path(path);
        Ok(())
    }

    fn rebuild_tree(&mut self) {
        let keep = self.highlighted().map(|e| e.path.clone());
        self.tree = tree_entries(&self.vfs);
        self.tree_gen += 1;
        self.highlight = if self.tree.is_empty() {
            None
        } else {
            let idx = keep
                .and_then(|p| self.tree.iter().position(|e| e.path == p))
                .or(self.highlight)
                .unwrap_or(0);
            Some(idx.min(self.tree.len() - 1))
        };
        self.follow_highlight();
    }

    fn highlight_path(&mut self, path: &str) {
        if let Some(i) = self.tree.iter().position(|e| e.path == path) {
            self.set_highlight(i);
        }
    }

    fn set_highlight(&mut self, i: usize) {
        self.highlight = Some(i);
        self.follow_highlight();
    }

    fn follow_highlight(&mut self) {
        let rows = self.layout.body_rows;
        match self.highlight {
            None => self.tree_scroll = 0,
            Some(h) if h < self.tree_scroll => self.tree_scroll = h,
            Some(h) if h >= self.tree_scroll + rows => self.tree_scroll = h + 1 - rows,
            Some(_) => {}
        }
    }

    fn layout_key(&self) -> LayoutKey {
        LayoutKey {
            scroll: self.editor.scroll(),
            hscroll: self.editor.hscroll(),
            gutter: self.editor.gutter_width(),
            path: self.editor.path.clone(),
            focus: self.focus,
            tree_scroll: self.tree_scroll,
            tree_gen: self.tree_gen,
            scrollback: self.shell.scrollback.len(),
        }
    }

    fn cursor_screen_row(&self) -> usize {
        match self.focus {
            Focus::Editor => self.editor.cursor().0 - self.editor.scroll(),
            Focus::Shell => self.shell_lines_shown().saturating_sub(1),
        }
    }

    fn highlight_screen_row(&self) -> Option<usize> {
        self.highlight.map(|h| h - self.tree_scroll)
    }

    /// Number of right-pane rows used by the shell, prompt included.
    fn shell_lines_shown(&self) -> usize {
        (self.shell.scrollback.len() + 1).min(self.layout.body_rows)
    }

    /// Full redraw from state.
    pub fn render(&self) -> Frame {
        let mut f = Frame::new(self.layout.width as u16, self.layout.height as u16)
            .expect("geometry validated at construction");
        for y in 0..self.layout.body_rows {
            self.draw_body_row(&mut f, y);
        }
        self.draw_status(&mut f);
        f
    }

    fn draw_body_row(&self, f: &mut Frame, y: usize) {
        let l = self.layout;
        f.fill(0, y, l.width, Cell::BLANK);
        self.draw_tree_row(f, y);
        f.put(l.tree_width, y, Cell::new(SEPARATOR, Style::PLAIN));
        match self.focus {
            Focus::Editor => self.draw_editor_row(f, y),
            Focus::Shell => self.draw_shell_row(f, y),
        }
    }

    fn draw_tree_row(&self, f: &mut Frame, y: usize) {
        let i = self.tree_scroll + y;
        let Some(e) = self.tree.get(i) else { return };
        let w = self.layout.tree_width;
        let mut style = if e.is_dir { DIR_STYLE } else { TREE_STYLE };
        if !e.is_dir && self.editor.path.as_deref() == Some(e.path.as_str()) {
            style = style.bold();
        }
        if self.highlight == Some(i) {
            style = style.inverse();
            f.fill(0, y, w, Cell::new(' ', style));
        }
        let indent = (2 * e.depth).min(w.saturating_sub(1));
        let n = f.put_str(indent, y, &e.name, style, w - indent);
        if e.is_dir {
            f.put_str(indent + n, y, "/", style, w - indent - n);
        }
    }

    fn draw_editor_row(&self, f: &mut Frame, y: usize) {
        if self.editor.path.is_none() {
            return;
        }
        let l = self.layout;
        let x0 = l.editor_x;
        let row = self.editor.scroll() + y;
        let lines = self.editor.lines();
        if row >= lines.len() {
            f.put(x0, y, Cell::new('~', FILLER_STYLE));
            return;
        }
        let gutter = self.editor.gutter_width();
        let num = format!("{:>width$}", row + 1, width = gutter - 1);
        f.put_str(x0, y, &num, GUTTER_STYLE, gutter - 1);
        let tx = x0 + gutter;
        let tw = self.editor.text_width().min(l.width.saturating_sub(tx));
        let hs = self.editor.hscroll();
        let line = &lines[row];
        for (k, &ch) in line.iter().skip(hs).take(tw).enumerate() {
            f.put(tx + k, y, Cell::new(super::frame::display_char(ch), Style::PLAIN));
        }
        let (crow, ccol) = self.editor.cursor();
        if crow == row && ccol >= hs && ccol - hs < tw {
            let x = tx + ccol - hs;
            let cell = f.get(x, y).unwrap_or(Cell::BLANK);
            f.put(x, y, Cell::new(cell.ch, cell.style.inverse()));
        }
    }

    fn draw_shell_row(&self, f: &mut Frame, y: usize) {
        let l = self.layout;
        let shown = self.shell_lines_shown();
        if y >= shown {
            return;
        }
        let x0 = l.editor_x;
        let w = l.editor_width;
        if y + 1 == shown {
            // Prompt line, scrolled so the cursor stays visible.
            let line: Vec<char> = PROMPT.chars().chain(self.shell.input.chars()).collect();
            let start = (line.len() + 1).saturating_sub(w);
            let visible: String = line[start..].iter().collect();
            let n = f.put_str(x0, y, &visible, Style::PLAIN, w);
            f.put(x0 + n, y, Cell::new(' ', Style::PLAIN.inverse()));
            return;
        }
        let first = self.shell.scrollback.len() + 1 - shown;
        f.put_str(x0, y, &self.shell.scrollback[first + y], Style::PLAIN, w);
    }

    fn draw_status(&self, f: &mut Frame) {
        let l = self.layout;
        let y = l.height - 1;
        f.fill(0, y, l.width, Cell::new(' ', STATUS_STYLE));
        let mode = match (self.focus, self.editor.mode) {
            (Focus::Shell, _) => "-- SHELL --",
            (_, Mode::Insert) => "-- INSERT --",
            (_, Mode::Normal) => "-- NORMAL --",
        };
        let mut left = format!(" {mode}");
        if let Some(p) = &self.editor.path {
            left.push(' ');
            left.push_str(p);
            if self.editor.dirty {
                left.push_str(" [+]");
            }
        }
        let (r, c) = self.editor.cursor();
        let right = format!("Ln {}, Col {} ", r + 1, c + 1);
        let rlen = right.chars().count();
        let room = l.width.saturating_sub(rlen + 1);
        f.put_str(0, y, &left, STATUS_STYLE, room);
        if rlen < l.width {
            f.put_str(l.width - rlen, y, &right, STATUS_STYLE, rlen);
        }
    }
}

/// Serializes actions as NUL-terminated records.
pub fn write_action_log(actions: &[Action]) -> Vec<u8> {
    let mut out = Vec::new();
    for a in actions {
        out.extend_from_slice(a.encode().as_bytes());
        out.push(0);
    }
    out
}

pub fn read_action_log(bytes: &[u8]) -> Result<Vec<Action>, TermError> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let Some(body) = bytes.strip_suffix(&[0]) else {
        return Err(TermError::ActionLog("missing final terminator".into()));
    };
    body.split(|&b| b == 0).map(Action::parse_bytes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session_with(files: &[(&str, &str)]) -> Session {
        let mut vfs = Vfs::default();
        for (p, c) in files {
            vfs.write(p, c.as_bytes().to_vec());
        }
        Session::with_vfs(160, 48, vfs).unwrap()
    }

    fn ctl(c: Control) -> Action {
        Action::Control(c)
    }

    #[test]
    fn small_geometry_is_rejected() {
        assert!(matches!(Session::new(0, 48), Err(TermError::Geometry { .. })));
        assert!(matches!(Session::new(160, 1), Err(TermError::Geometry { .. })));
        assert!(Session::new(16, 2).is_ok());
    }

    #[test]
    fn empty_vfs_renders_empty_panes() {
        let s = Session::new(160, 48).unwrap();
        let f = s.render();
        let l = s.layout();
        for y in 0..l.body_rows {
            for x in 0..l.width {
                let expect = if x == l.tree_width { SEPARATOR } else { ' ' };
                assert_eq!(f.get(x, y).unwrap().ch, expect);
            }
        }
        assert_eq!(&f, s.frame());
    }

    #[test]
    fn insert_at_end_of_line_26() {
        let text: Vec<String> = (0..40).map(|i| format!("line {i}")).collect();
        let mut s = session_with(&[("a.txt", &text.join("\n"))]);
        s.apply_action(&ctl(Control::Open("a.txt".into()))).unwrap();
        for _ in 0..25 {
            s.apply_action(&ctl(Control::Down)).unwrap();
        }
        s.apply_action(&ctl(Control::End)).unwrap();
        s.apply_action(&ctl(Control::ToggleMode)).unwrap();
        let (row, col) = s.editor().cursor();
        assert_eq!((row, col), (25, 7));
        s.apply_action(&Action::Insert('a')).unwrap();
        assert_eq!(s.editor().cursor(), (25, 8));
        let x = s.layout().editor_x + s.editor().gutter_width() + col;
        assert_eq!(s.frame().get(x, 25).unwrap().ch, 'a');
        assert!(s.frame().get(x + 1, 25).unwrap().style.is_inverse());
    }

    #[test]
    fn left_at_column_zero_is_a_no_op() {
        let mut s = session_with(&[("a.txt", "abc")]);
        s.apply_action(&ctl(Control::Open("a.txt".into()))).unwrap();
        let before = s.frame().clone();
        s.apply_action(&ctl(Control::Left)).unwrap();
        assert_eq!(s.editor().cursor(), (0, 0));
        assert_eq!(&before, s.frame());
    }

    #[test]
    fn scrolled_view_numbers_lines() {
        let text: Vec<String> = (0..100).map(|i| format!("{i}")).collect();
        let mut s = session_with(&[("a.txt", &text.join("\n"))]);
        s.apply_action(&ctl(Control::Open("a.txt".into()))).unwrap();
        s.editor.set_scroll(50);
        let f = s.render();
        let x0 = s.layout().editor_x;
        let gutter: String = (0..3).map(|k| f.get(x0 + k, 0).unwrap().ch).collect();
        assert_eq!(gutter, " 51");
        assert_eq!(f, s.render());
    }

    #[test]
    fn tree_highlights_open_file() {
        let mut s = session_with(&[("a.txt", ""), ("src/b.rs", "fn b() {}")]);
        s.apply_action(&ctl(Control::Open("src/b.rs".into()))).unwrap();
        assert_eq!(s.highlighted().unwrap().path, "src/b.rs");
        let f = s.frame();
        let cell = f.get(2, 2).unwrap();
        assert_eq!(cell.ch, 'b');
        assert!(cell.style.is_inverse() && cell.style.is_bold());
        assert!(f.row_text(47).contains("src/b.rs"));
    }

    #[test]
    fn tree_navigation_opens_files() {
        let mut s = session_with(&[("a.txt", "A"), ("b.txt", "B")]);
        s.apply_action(&ctl(Control::TreeDown)).unwrap();
        s.apply_action(&ctl(Control::TreeEnter)).unwrap();
        assert_eq!(s.editor().text(), "B");
        s.apply_action(&ctl(Control::TreeUp)).unwrap();
        s.apply_action(&ctl(Control::TreeUp)).unwrap();
        s.apply_action(&ctl(Control::TreeEnter)).unwrap();
        assert_eq!(s.editor().text(), "A");
    }

    #[test]
    fn save_writes_buffer_and_creates_files() {
        let mut s = Session::new(80, 24).unwrap();
        let mut actions = vec![ctl(Control::Open("new.txt".into())), ctl(Control::ToggleMode)];
        actions.extend(Action::type_text("hello\nworld\n"));
        actions.push(ctl(Control::Save));
        s.apply_all(&actions).unwrap();
        assert_eq!(s.vfs().get("new.txt").unwrap(), b"hello\nworld\n");
        assert_eq!(s.tree().len(), 1);
        assert!(!s.editor().dirty);
        assert_eq!(s.frame(), &s.render());
    }

    #[test]
    fn shell_rm_closes_open_file() {
        let mut s = session_with(&[("a.txt", "x"), ("b.txt", "y")]);
        s.apply_action(&ctl(Control::Open("a.txt".into()))).unwrap();
        s.apply_action(&ctl(Control::ToggleFocus)).unwrap();
        s.apply_all(&Action::type_text("rm a.txt\n").collect::<Vec<_>>()).unwrap();
        assert!(!s.vfs().contains("a.txt"));
        assert!(s.editor().path.is_none());
        assert_eq!(s.highlighted().unwrap().path, "b.txt");
        assert_eq!(s.frame(), &s.render());
    }

    #[test]
    fn binary_files_are_refused() {
        let mut s = session_with(&[("bin", "a\0b")]);
        assert!(matches!(
            s.apply_action(&ctl(Control::Open("bin".into()))),
            Err(TermError::NotText(_))
        ));
        assert!(matches!(
            s.apply_action(&Action::Insert('\u{1b}')),
            Err(TermError::UnsupportedAction(_))
        ));
    }

    #[test]
    fn action_log_round_trips() {
        let actions = vec![
            Action::Insert('x'),
            Action::Backspace,
            ctl(Control::Open("a b".into())),
            ctl(Control::Save),
        ];
        let bytes = write_action_log(&actions);
        assert_eq!(read_action_log(&bytes).unwrap(), actions);
        assert!(read_action_log(b"x").is_err());
        assert!(read_action_log(b"").unwrap().is_empty());
    }
}
