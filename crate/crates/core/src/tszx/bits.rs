/// MSB-first bit writer.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        if n == 0 {
            return;
        }
        self.acc = (self.acc << n) | (value as u64 & ((1u64 << n) - 1));
        self.nbits += n;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.bytes.push((self.acc >> self.nbits) as u8);
        }
        self.acc &= (1u64 << self.nbits) - 1;
    }

    pub fn bit_len(&self) -> u64 {
        self.bytes.len() as u64 * 8 + self.nbits as u64
    }

    /// Pads with zero bits to a byte boundary.
    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.write(0, pad);
        }
        self.bytes
    }
}

/// MSB-first bit reader over a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn read(&mut self, n: u32) -> Option<u32> {
        if self.pos + n as u64 > self.bytes.len() as u64 * 8 {
            return None;
        }
        let mut v = 0u32;
        for _ in 0..n {
            let byte = self.bytes[(self.pos >> 3) as usize];
            let bit = (byte >> (7 - (self.pos & 7))) & 1;
            v = (v << 1) | bit as u32;
            self.pos += 1;
        }
        Some(v)
    }

    pub fn bit_pos(&self) -> u64 {
        self.pos
    }

    /// Byte offset after skipping the padding; `None` if padding bits are
    /// not zero.
    pub fn align(&mut self) -> Option<usize> {
        let rem = (8 - (self.pos & 7)) & 7;
        if rem > 0 && self.read(rem as u32)? != 0 {
            return None;
        }
        Some((self.pos >> 3) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write(1, 1);
        w.write(0, 1);
        w.write(1, 1);
        w.write(0xAB, 8);
        assert_eq!(w.bit_len(), 11);
        let b = w.finish();
        assert_eq!(b, vec![0b1011_0101, 0b0110_0000]);
        let mut r = BitReader::new(&b);
        assert_eq!(r.read(3), Some(0b101));
        assert_eq!(r.read(8), Some(0xAB));
        assert_eq!(r.align(), Some(2));
        assert_eq!(r.read(1), None);
    }
}
