use std::collections::HashMap;

use super::bits::{BitReader, BitWriter};
use super::*;
use crate::termemu::{Action, Cell, Frame, Style, DEFAULT_HEIGHT, DEFAULT_WIDTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    /// Copy `n` cells from the same positions in the previous frame.
    Equiv(u16),
    /// Repeat the most recently emitted cell `n` times.
    Repeat(u16),
    /// Palette index.
    Literal(u32),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenCounts {
    pub equiv_tokens: u64,
    pub equiv_cells: u64,
    pub repeat_tokens: u64,
    pub repeat_cells: u64,
    pub literal_tokens: u64,
    /// Runs that needed the 16-bit length form.
    pub long_runs: u64,
}

impl TokenCounts {
    fn add(&mut self, t: Token) {
        match t {
            Token::Equiv(n) => {
                self.equiv_tokens += 1;
                self.equiv_cells += n as u64;
                self.long_runs += (n > 255) as u64;
            }
            Token::Repeat(n) => {
                self.repeat_tokens += 1;
                self.repeat_cells += n as u64;
                self.long_runs += (n > 255) as u64;
            }
            Token::Literal(_) => self.literal_tokens += 1,
        }
    }

    pub fn cells(&self) -> u64 {
        self.equiv_cells + self.repeat_cells + self.literal_tokens
    }

    pub fn tokens(&self) -> u64 {
        self.equiv_tokens + self.repeat_tokens + self.literal_tokens
    }
}

/// Bits needed for a palette index.
fn index_bits(palette_len: usize) -> u32 {
    if palette_len <= 1 {
        0
    } else {
        usize::BITS - (palette_len - 1).leading_zeros()
    }
}

fn write_token(w: &mut BitWriter, t: Token, k: u32) {
    match t {
        Token::Literal(i) => {
            w.write(0, 1);
            w.write(i, k);
        }
        Token::Equiv(n) | Token::Repeat(n) => {
            w.write(1, 1);
            w.write(matches!(t, Token::Repeat(_)) as u32, 1);
            let long = n > 255;
            w.write(long as u32, 1);
            w.write((n & 0xff) as u32, 8);
            if long {
                w.write((n >> 8) as u32, 8);
            }
        }
    }
}

fn write_leb128(out: &mut Vec<u8>, mut v: u32) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

/// Greedy tokenization of one frame against its predecessor.
fn tokenize(prev: &[Cell], cur: &[Cell], mut last: Cell, mut emit: impl FnMut(Token, Cell)) -> Cell {
    let n = cur.len();
    let mut i = 0;
    while i < n {
        let cap = (n - i).min(MAX_RUN);
        let eq = cur[i..i + cap].iter().zip(&prev[i..i + cap]).take_while(|(a, b)| a == b).count();
        let rep = cur[i..i + cap].iter().take_while(|&&c| c == last).count();
        let (tok, len) = if eq >= rep && eq > 0 {
            (Token::Equiv(eq as u16), eq)
        } else if rep > 0 {
            (Token::Repeat(rep as u16), rep)
        } else {
            (Token::Literal(0), 1)
        };
        last = cur[i + len - 1];
        emit(tok, cur[i]);
        i += len;
    }
    last
}

/// Streaming encoder: frames and actions are pushed one at a time, the
/// palette (and with it the index width) is fixed at `finish`.
#[derive(Debug, Clone)]
pub struct Encoder {
    width: u16,
    height: u16,
    prev: Vec<Cell>,
    last: Cell,
    tokens: Vec<Token>,
    palette: Vec<Cell>,
    index: HashMap<Cell, u32>,
    frames: usize,
    actions: Vec<u8>,
    action_count: usize,
}

impl Encoder {
    pub fn new(width: u16, height: u16) -> Result<Encoder, TszxError> {
        if width == 0 || height == 0 {
            return Err(TszxError::Geometry { width, height });
        }
        Ok(Encoder {
            width,
            height,
            prev: vec![Cell::BLANK; width as usize * height as usize],
            last: Cell::BLANK,
            tokens: Vec::new(),
            palette: Vec::new(),
            index: HashMap::new(),
            frames: 0,
            actions: Vec::new(),
            action_count: 0,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frames
    }

    pub fn push_frame(&mut self, frame: &Frame) -> Result<(), TszxError> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(TszxError::GeometryMismatch {
                index: self.frames,
                width: frame.width(),
                height: frame.height(),
                expected_width: self.width,
                expected_height: self.height,
            });
        }
        let Encoder { prev, last, tokens, palette, index, .. } = self;
        let mut overflow = false;
        *last = tokenize(prev, frame.cells(), *last, |t, cell| {
            let t = match t {
                Token::Literal(_) => {
                    let next = palette.len() as u32;
                    let i = *index.entry(cell).or_insert_with(|| {
                        palette.push(cell);
                        next
                    });
                    overflow |= palette.len() > MAX_PALETTE;
                    Token::Literal(i)
                }
                t => t,
            };
            tokens.push(t);
        });
        if overflow {
            return Err(TszxError::PaletteOverflow);
        }
        self.prev.copy_from_slice(frame.cells());
        self.frames += 1;
        Ok(())
    }

    pub fn push_action(&mut self, action: &Action) {
        self.actions.extend_from_slice(action.encode().as_bytes());
        self.actions.push(0);
        self.action_count += 1;
    }

    pub fn finish(self) -> Result<Vec<u8>, TszxError> {
        let expected = self.frames.saturating_sub(1);
        if self.action_count != expected {
            return Err(TszxError::ActionCount { frames: self.frames, actions: self.action_count });
        }
        let mut out = Vec::with_capacity(HEADER_LEN + self.palette.len() * 3 + self.tokens.len() + self.actions.len() + 4);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(OUTER_NONE);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&(self.frames as u32).to_le_bytes());
        out.extend_from_slice(&(self.palette.len() as u16).to_le_bytes());
        for c in &self.palette {
            write_leb128(&mut out, c.ch as u32);
            out.push(c.style.0);
        }
        let k = index_bits(self.palette.len());
        let mut w = BitWriter::new();
        for &t in &self.tokens {
            write_token(&mut w, t, k);
        }
        out.extend_from_slice(&w.finish());
        out.extend_from_slice(&(self.action_count as u32).to_le_bytes());
        out.extend_from_slice(&self.actions);
        Ok(out)
    }
}

/// Encodes a whole stream. An empty frame list uses the default geometry.
pub fn encode(frames: &[Frame], actions: &[Action]) -> Result<Vec<u8>, TszxError> {
    let (w, h) = frames.first().map_or((DEFAULT_WIDTH, DEFAULT_HEIGHT), |f| (f.width(), f.height()));
    let mut enc = Encoder::new(w, h)?;
    for f in frames {
        enc.push_frame(f)?;
    }
    for a in actions {
        enc.push_action(a);
    }
    enc.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub version: u8,
    pub outer: u8,
    pub width: u16,
    pub height: u16,
    pub frame_count: u32,
    pub palette: Vec<Cell>,
}

impl Header {
    pub fn cells_per_frame(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], TszxError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(TszxError::Truncated(what))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, TszxError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, TszxError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, TszxError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    /// Canonical LEB128 of at most 21 bits.
    fn leb128(&mut self, entry: usize) -> Result<u32, TszxError> {
        let mut v = 0u32;
        for i in 0..3 {
            let b = self.u8("palette")?;
            v |= ((b & 0x7f) as u32) << (7 * i);
            if b & 0x80 == 0 {
                if i > 0 && b == 0 {
                    return Err(TszxError::BadPaletteEntry(entry));
                }
                return Ok(v);
            }
        }
        Err(TszxError::BadPaletteEntry(entry))
    }
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize), TszxError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "header").map_err(|_| TszxError::BadMagic)? != MAGIC {
        return Err(TszxError::BadMagic);
    }
    let version = c.u8("header")?;
    if version != VERSION {
        return Err(TszxError::BadVersion(version));
    }
    let outer = c.u8("header")?;
    if outer != OUTER_NONE {
        return Err(TszxError::UnsupportedOuter(outer));
    }
    let width = c.u16("header")?;
    let height = c.u16("header")?;
    if width == 0 || height == 0 {
        return Err(TszxError::Geometry { width, height });
    }
    let frame_count = c.u32("header")?;
    let n = c.u16("header")? as usize;
    let mut palette = Vec::with_capacity(n);
    let mut seen = std::collections::HashSet::with_capacity(n);
    for i in 0..n {
        let cp = c.leb128(i)?;
        let ch = char::from_u32(cp).ok_or(TszxError::BadPaletteEntry(i))?;
        let cell = Cell::new(ch, Style(c.u8("palette")?));
        if !seen.insert(cell) {
            return Err(TszxError::BadPaletteEntry(i));
        }
        palette.push(cell);
    }
    Ok((Header { version, outer, width, height, frame_count, palette }, c.pos))
}

/// Streaming decoder: read the header, pull frames one by one, then
/// `finish` to validate the tail and collect the actions.
pub struct Decoder<'a> {
    bytes: &'a [u8],
    header: Header,
    body: usize,
    reader: BitReader<'a>,
    k: u32,
    prev: Vec<Cell>,
    last: Cell,
    frames_read: usize,
    counts: TokenCounts,
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Decoder<'a>, TszxError> {
        let (header, body) = parse_header(bytes)?;
        let k = index_bits(header.palette.len());
        let cells = header.cells_per_frame();
        // Each frame costs at least 11 bits per 65535 cells; refuse headers
        // the remaining bytes cannot possibly satisfy before allocating.
        let min_bits = (cells as u64 * 11).div_ceil(MAX_RUN as u64) * header.frame_count as u64;
        if min_bits > (bytes.len() - body) as u64 * 8 {
            return Err(TszxError::Truncated("frame bitstream"));
        }
        let cells = if header.frame_count == 0 { 0 } else { cells };
        Ok(Decoder {
            bytes,
            reader: BitReader::new(&bytes[body..]),
            body,
            k,
            prev: vec![Cell::BLANK; cells],
            last: Cell::BLANK,
            frames_read: 0,
            counts: TokenCounts::default(),
            header,
        })
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn counts(&self) -> TokenCounts {
        self.counts
    }

    /// Decodes the next frame into the internal buffer.
    pub fn next_cells(&mut self) -> Result<Option<&[Cell]>, TszxError> {
        if self.frames_read >= self.header.frame_count as usize {
            return Ok(None);
        }
        let frame = self.frames_read;
        let n = self.prev.len();
        let trunc = || TszxError::Truncated("frame bitstream");
        let mut i = 0;
        while i < n {
            let r = &mut self.reader;
            if r.read(1).ok_or_else(trunc)? == 0 {
                let idx = r.read(self.k).ok_or_else(trunc)?;
                let cell = *self
                    .header
                    .palette
                    .get(idx as usize)
                    .ok_or(TszxError::BadPaletteIndex { frame, index: idx })?;
                self.prev[i] = cell;
                self.last = cell;
                self.counts.add(Token::Literal(idx));
                i += 1;
                continue;
            }
            let repeat = r.read(1).ok_or_else(trunc)? == 1;
            let long = r.read(1).ok_or_else(trunc)? == 1;
            let mut len = r.read(8).ok_or_else(trunc)? as usize;
            if long {
                len |= (r.read(8).ok_or_else(trunc)? as usize) << 8;
            }
            if len == 0 || long != (len > 255) {
                return Err(TszxError::NonCanonicalRun { frame, len });
            }
            if i + len > n {
                return Err(TszxError::RunCrossesFrame { frame, at: i, len });
            }
            if repeat {
                self.prev[i..i + len].fill(self.last);
                self.counts.add(Token::Repeat(len as u16));
            } else {
                // Equivalence: cells already hold the previous frame.
                self.last = self.prev[i + len - 1];
                self.counts.add(Token::Equiv(len as u16));
            }
            i += len;
        }
        self.frames_read += 1;
        Ok(Some(&self.prev))
    }

    pub fn next_frame(&mut self) -> Result<Option<Frame>, TszxError> {
        let (w, h) = (self.header.width, self.header.height);
        Ok(self
            .next_cells()?
            .map(|cells| Frame::from_cells(w, h, cells.to_vec()).expect("geometry checked in header")))
    }

    /// Validates padding and the action section. All frames must have been
    /// read.
    pub fn finish(mut self) -> Result<(Vec<Action>, TokenCounts, usize), TszxError> {
        if self.frames_read != self.header.frame_count as usize {
            return Err(TszxError::State);
        }
        let pad_end = self.reader.align().ok_or(TszxError::NonZeroPadding)?;
        let bitstream_bytes = pad_end;
        let mut c = Cursor { bytes: self.bytes, pos: self.body + pad_end };
        let count = c.u32("action count")? as usize;
        let frames = self.frames_read;
        if count != frames.saturating_sub(1) {
            return Err(TszxError::ActionCount { frames, actions: count });
        }
        let mut actions = Vec::with_capacity(count.min(self.bytes.len()));
        for i in 0..count {
            let rest = &self.bytes[c.pos..];
            let end = rest.iter().position(|&b| b == 0).ok_or(TszxError::Truncated("actions"))?;
            let a = Action::parse_bytes(&rest[..end]).map_err(|_| TszxError::BadAction(i))?;
            actions.push(a);
            c.pos += end + 1;
        }
        if c.pos != self.bytes.len() {
            return Err(TszxError::TrailingBytes(self.bytes.len() - c.pos));
        }
        Ok((actions, self.counts, bitstream_bytes))
    }
}

/// Validates every frame without keeping them and returns the actions.
pub fn decode_actions(bytes: &[u8]) -> Result<Vec<Action>, TszxError> {
    let mut d = Decoder::new(bytes)?;
    while d.next_cells()?.is_some() {}
    Ok(d.finish()?.0)
}

pub fn decode(bytes: &[u8]) -> Result<(Vec<Frame>, Vec<Action>), TszxError> {
    let mut d = Decoder::new(bytes)?;
    let mut frames = Vec::new();
    while let Some(f) = d.next_frame()? {
        frames.push(f);
    }
    let (actions, _, _) = d.finish()?;
    Ok((frames, actions))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub width: u16,
    pub height: u16,
    pub frames: u64,
    pub palette_len: usize,
    pub actions: usize,
    pub file_bytes: u64,
    pub bitstream_bytes: u64,
    pub naive_bytes: u64,
    /// Naive size over file size.
    pub ratio: f64,
    pub counts: TokenCounts,
}

/// Fully validates a stream and reports its compression.
pub fn inspect(bytes: &[u8]) -> Result<Report, TszxError> {
    let mut d = Decoder::new(bytes)?;
    while d.next_cells()?.is_some() {}
    let h = d.header().clone();
    let (actions, counts, bitstream_bytes) = d.finish()?;
    let naive = h.frame_count as u64 * h.cells_per_frame() as u64 * NAIVE_BYTES_PER_CELL;
    Ok(Report {
        width: h.width,
        height: h.height,
        frames: h.frame_count as u64,
        palette_len: h.palette.len(),
        actions: actions.len(),
        file_bytes: bytes.len() as u64,
        bitstream_bytes: bitstream_bytes as u64,
        naive_bytes: naive,
        ratio: naive as f64 / bytes.len() as f64,
        counts,
    })
}
