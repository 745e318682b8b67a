use super::timing::DramTiming;
use crate::engine::LINE_BYTES;

/// Location of a line inside one channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DramAddress {
    pub subchannel: u32,
    /// Bank index within the subchannel, ranks flattened.
    pub bank: u32,
    pub column: u32,
    pub row: u64,
}

impl DramAddress {
    /// Index into a channel's flat bank array.
    pub fn flat_bank(&self, timing: &DramTiming) -> usize {
        (self.subchannel * timing.banks_per_subchannel() + self.bank) as usize
    }
}

/// Splits a channel-local byte address. Bits above the line offset are
/// assigned low to high: subchannel, bank, column, row.
pub fn decode(local_address: u64, timing: &DramTiming) -> DramAddress {
    let mut line = local_address / LINE_BYTES;
    let sub = timing.subchannels as u64;
    let banks = timing.banks_per_subchannel() as u64;
    let cols = timing.columns_per_row as u64;
    let subchannel = (line % sub) as u32;
    line /= sub;
    let bank = (line % banks) as u32;
    line /= banks;
    let column = (line % cols) as u32;
    let row = line / cols;
    DramAddress { subchannel, bank, column, row }
}

/// Byte stride between consecutive rows of the same bank, in local addresses.
pub fn same_bank_row_stride(timing: &DramTiming) -> u64 {
    LINE_BYTES * timing.subchannels as u64 * timing.banks_per_subchannel() as u64 * timing.columns_per_row as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consecutive_lines_alternate_subchannels_then_banks() {
        let t = DramTiming::default();
        let a: Vec<_> = (0..4).map(|i| decode(i * 64, &t)).collect();
        assert_eq!((a[0].subchannel, a[0].bank), (0, 0));
        assert_eq!((a[1].subchannel, a[1].bank), (1, 0));
        assert_eq!((a[2].subchannel, a[2].bank), (0, 1));
        assert_eq!((a[3].subchannel, a[3].bank), (1, 1));
    }

    #[test]
    fn row_stride_keeps_bank_and_moves_row() {
        let t = DramTiming::default();
        let base = decode(0x1240, &t);
        let next = decode(0x1240 + same_bank_row_stride(&t), &t);
        assert_eq!((base.subchannel, base.bank, base.column), (next.subchannel, next.bank, next.column));
        assert_eq!(next.row, base.row + 1);
    }
}
