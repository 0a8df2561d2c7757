//! MSB-first bit streams for the packed archive sections.

#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    buf: Vec<u8>,
    acc: u128,
    pending: u32,
}

impl BitWriter {
    pub fn with_capacity_bits(bits: u64) -> Self {
        BitWriter {
            buf: Vec::with_capacity(bits.div_ceil(8) as usize),
            ..Default::default()
        }
    }

    /// Appends the low `width` bits of `value` (width ≤ 64).
    #[inline]
    pub fn write(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        self.acc = (self.acc << width) | value as u128;
        self.pending += width;
        while self.pending >= 8 {
            self.pending -= 8;
            self.buf.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u128 << self.pending) - 1;
    }

    /// Flushes the final partial byte, zero padded.
    pub fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.buf.push((self.acc << (8 - self.pending)) as u8);
        }
        self.buf
    }
}

#[derive(Debug)]
pub(crate) struct BitReader<'a> {
    data: &'a [u8],
    next: usize,
    acc: u128,
    available: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader {
            data,
            next: 0,
            acc: 0,
            available: 0,
        }
    }

    /// Reads `width` bits (≤ 64); `None` past the end of the data.
    #[inline]
    pub fn read(&mut self, width: u32) -> Option<u64> {
        if width == 0 {
            return Some(0);
        }
        while self.available < width {
            let byte = *self.data.get(self.next)?;
            self.next += 1;
            self.acc = (self.acc << 8) | byte as u128;
            self.available += 8;
        }
        self.available -= width;
        let v = (self.acc >> self.available) as u64 & mask(width);
        self.acc &= (1u128 << self.available) - 1;
        Some(v)
    }
}

#[inline]
pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packs_msb_first() {
        let mut w = BitWriter::default();
        w.write(0b1, 1);
        w.write(0b011, 3);
        w.write(0b1, 1);
        assert_eq!(w.finish(), vec![0b1011_1000]);
    }

    proptest! {
        #[test]
        fn write_then_read(fields in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..50)) {
            let mut w = BitWriter::default();
            let fields: Vec<(u64, u32)> = fields.into_iter().map(|(v, k)| (v & mask(k), k)).collect();
            let total: u32 = fields.iter().map(|f| f.1).sum();
            for &(v, k) in &fields {
                w.write(v, k);
            }
            let bytes = w.finish();
            prop_assert_eq!(bytes.len() as u32, total.div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &(v, k) in &fields {
                prop_assert_eq!(r.read(k), Some(v));
            }
        }
    }
}
