//! Numeral domain types: the `{2^n - 1, 2^n, 2^n + 1}` moduli set, signed-digit
//! vectors, and residue tuples.

use std::fmt;

use crate::error::{Error, Result};

/// Smallest supported channel size. `n = 1` would give the modulus 1.
pub const MIN_CHANNEL_SIZE: u32 = 2;
/// Largest supported channel size; keeps the dynamic range `2^(3n) - 2^n`
/// inside a `u128`.
pub const MAX_CHANNEL_SIZE: u32 = 42;
/// Largest supported signed-digit width; values always fit an `i128`.
pub const MAX_SD_WIDTH: usize = 127;

/// Position of a channel inside a residue tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// The `2^n - 1` channel.
    MinusOne = 0,
    /// The `2^n` channel.
    Power = 1,
    /// The `2^n + 1` channel.
    PlusOne = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::MinusOne, Channel::Power, Channel::PlusOne];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// CRT reconstruction constants for one channel: `M / m` and its inverse
/// modulo `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrtConstant {
    pub cofactor: u128,
    pub inverse: u64,
}

/// The moduli set `{2^n - 1, 2^n, 2^n + 1}` with its dynamic range and CRT
/// constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModuliSet {
    n: u32,
    moduli: [u64; 3],
    range: u128,
    crt: [CrtConstant; 3],
}

impl ModuliSet {
    pub fn new(n: u32) -> Result<Self> {
        if !(MIN_CHANNEL_SIZE..=MAX_CHANNEL_SIZE).contains(&n) {
            return Err(Error::InvalidChannelSize {
                n,
                min: MIN_CHANNEL_SIZE,
                max: MAX_CHANNEL_SIZE,
            });
        }
        let pow = 1u64 << n;
        let moduli = [pow - 1, pow, pow + 1];
        let range = moduli.iter().map(|&m| m as u128).product::<u128>();

        let mut crt = [CrtConstant {
            cofactor: 0,
            inverse: 0,
        }; 3];
        for (slot, &m) in crt.iter_mut().zip(&moduli) {
            let cofactor = range / m as u128;
            let reduced = (cofactor % m as u128) as u64;
            let inverse = mod_inverse(reduced, m).ok_or_else(|| {
                Error::Config(format!("moduli of n = {n} are not pairwise coprime"))
            })?;
            *slot = CrtConstant { cofactor, inverse };
        }

        let set = ModuliSet {
            n,
            moduli,
            range,
            crt,
        };
        debug_assert!(set.crt_constants_hold());
        Ok(set)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Moduli in channel order `[2^n - 1, 2^n, 2^n + 1]`.
    pub fn moduli(&self) -> [u64; 3] {
        self.moduli
    }

    pub fn modulus(&self, ch: Channel) -> u64 {
        self.moduli[ch.index()]
    }

    /// Dynamic range `M = (2^n - 1) 2^n (2^n + 1) = 2^(3n) - 2^n`.
    pub fn range(&self) -> u128 {
        self.range
    }

    pub fn crt_constants(&self) -> [CrtConstant; 3] {
        self.crt
    }

    /// `(N_i * inv(N_i)) mod m_i == 1` on every channel.
    pub fn crt_constants_hold(&self) -> bool {
        self.crt.iter().zip(&self.moduli).all(|(c, &m)| {
            let m = m as u128;
            (c.cofactor % m) * c.inverse as u128 % m == 1
        })
    }
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// A fixed-width signed-digit number, digits in `{-1, 0, 1}`, stored
/// least-significant first: `digits[i]` carries weight `2^i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SdVector {
    digits: Vec<i8>,
}

impl SdVector {
    pub fn new(digits: Vec<i8>) -> Result<Self> {
        if digits.len() > MAX_SD_WIDTH {
            return Err(Error::Shape(format!(
                "signed-digit width {} exceeds {MAX_SD_WIDTH}",
                digits.len()
            )));
        }
        if let Some((i, d)) = digits
            .iter()
            .enumerate()
            .find(|(_, d)| !(-1..=1).contains(*d))
        {
            return Err(Error::Domain(format!(
                "digit {d} at position {i} is not in {{-1, 0, 1}}"
            )));
        }
        Ok(SdVector { digits })
    }

    /// Caller guarantees every digit is in `{-1, 0, 1}` and the width is
    /// within bounds.
    pub(crate) fn from_digits_unchecked(digits: Vec<i8>) -> Self {
        debug_assert!(digits.len() <= MAX_SD_WIDTH);
        debug_assert!(digits.iter().all(|d| (-1..=1).contains(d)));
        SdVector { digits }
    }

    pub fn zero(width: usize) -> Self {
        SdVector::from_digits_unchecked(vec![0; width])
    }

    pub fn width(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> i8 {
        self.digits[i]
    }

    pub fn into_digits(self) -> Vec<i8> {
        self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// `sum(x_i * 2^i)`.
    pub fn value(&self) -> i128 {
        self.digits
            .iter()
            .rev()
            .fold(0i128, |acc, &d| acc * 2 + d as i128)
    }

    /// Plain binary for `v >= 0`, digitwise-negated binary of `|v|` otherwise.
    pub fn from_int(v: i128, width: usize) -> Result<Self> {
        if width > MAX_SD_WIDTH {
            return Err(Error::Shape(format!(
                "signed-digit width {width} exceeds {MAX_SD_WIDTH}"
            )));
        }
        let mag = v.unsigned_abs();
        let limit = if width >= 128 {
            u128::MAX
        } else {
            (1u128 << width) - 1
        };
        if mag > limit {
            return Err(Error::out_of_range(
                v,
                format!("|v| <= 2^{width} - 1 for width {width}"),
            ));
        }
        let sign: i8 = if v < 0 { -1 } else { 1 };
        let digits = (0..width).map(|i| ((mag >> i) & 1) as i8 * sign).collect();
        Ok(SdVector::from_digits_unchecked(digits))
    }

    /// Least nonnegative residue of the vector's value modulo `m`.
    pub fn canonical_residue(&self, m: u64) -> u64 {
        debug_assert!(m >= 2);
        self.value().rem_euclid(m as i128) as u64
    }

    /// Every vector of the given width, in lexicographic digit order.
    /// Only meant for small exhaustive checks.
    pub fn enumerate(width: usize) -> impl Iterator<Item = SdVector> {
        let count = 3usize.pow(width as u32);
        (0..count).map(move |k| SdVector::from_index(k, width))
    }

    /// The `k`-th vector of [`SdVector::enumerate`].
    pub fn from_index(mut k: usize, width: usize) -> SdVector {
        let mut digits = Vec::with_capacity(width);
        for _ in 0..width {
            digits.push((k % 3) as i8 - 1);
            k /= 3;
        }
        SdVector::from_digits_unchecked(digits)
    }
}

/// Displays digits most-significant first, e.g. `[0 1 -1]`.
impl fmt::Display for SdVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, d) in self.digits.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for SdVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SdVector{:?}", self.digits)
    }
}

pub fn sd_value(v: &SdVector) -> i128 {
    v.value()
}

pub fn sd_from_int(v: i128, width: usize) -> Result<SdVector> {
    SdVector::from_int(v, width)
}

pub fn sd_canonical_residue(v: &SdVector, m: u64) -> u64 {
    v.canonical_residue(m)
}

/// A value's residues on the three channels of a [`ModuliSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueTuple {
    residues: [u64; 3],
    moduli: ModuliSet,
}

impl ResidueTuple {
    pub fn new(residues: [u64; 3], moduli: ModuliSet) -> Result<Self> {
        for (ch, (&r, &m)) in Channel::ALL.iter().zip(residues.iter().zip(&moduli.moduli)) {
            if r >= m {
                return Err(Error::Domain(format!(
                    "residue {r} on channel {ch:?} is not below its modulus {m}"
                )));
            }
        }
        Ok(ResidueTuple { residues, moduli })
    }

    pub fn residues(&self) -> [u64; 3] {
        self.residues
    }

    pub fn residue(&self, ch: Channel) -> u64 {
        self.residues[ch.index()]
    }

    pub fn moduli(&self) -> &ModuliSet {
        &self.moduli
    }
}

impl fmt::Display for ResidueTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.residues;
        write!(f, "({a}, {b}, {c})")
    }
}

/// Residues held as width-`n` signed-digit vectors. Each channel only needs
/// to be congruent to its residue, not reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdResidueTuple {
    channels: [SdVector; 3],
    moduli: ModuliSet,
}

impl SdResidueTuple {
    pub fn new(channels: [SdVector; 3], moduli: ModuliSet) -> Result<Self> {
        let n = moduli.n() as usize;
        if let Some(c) = channels.iter().find(|c| c.width() != n) {
            return Err(Error::Shape(format!(
                "channel width {} does not match n = {n}",
                c.width()
            )));
        }
        Ok(SdResidueTuple { channels, moduli })
    }

    pub fn channels(&self) -> &[SdVector; 3] {
        &self.channels
    }

    pub fn channel(&self, ch: Channel) -> &SdVector {
        &self.channels[ch.index()]
    }

    pub fn moduli(&self) -> &ModuliSet {
        &self.moduli
    }

    /// Canonical residues in `[0, m_i)`.
    pub fn canonical(&self) -> ResidueTuple {
        let mut residues = [0u64; 3];
        for (r, (c, &m)) in residues
            .iter_mut()
            .zip(self.channels.iter().zip(&self.moduli.moduli))
        {
            *r = c.canonical_residue(m);
        }
        ResidueTuple {
            residues,
            moduli: self.moduli,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    fn sd(d: &[i8]) -> SdVector {
        SdVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn moduli_set_examples() {
        let ms = ModuliSet::new(3).unwrap();
        assert_eq!(ms.moduli(), [7, 8, 9]);
        assert_eq!(ms.range(), 504);

        let ms = ModuliSet::new(5).unwrap();
        assert_eq!(ms.moduli(), [31, 32, 33]);
        assert_eq!(ms.range(), 32736);

        assert!(matches!(
            ModuliSet::new(1),
            Err(Error::InvalidChannelSize { n: 1, .. })
        ));
        assert!(ModuliSet::new(MAX_CHANNEL_SIZE + 1).is_err());
    }

    #[test]
    fn moduli_set_invariants() {
        for n in 2..=32u32 {
            let ms = ModuliSet::new(n).unwrap();
            let [a, b, c] = ms.moduli().map(|m| m as u128);
            assert_eq!(gcd(a, b), 1);
            assert_eq!(gcd(a, c), 1);
            assert_eq!(gcd(b, c), 1);
            assert_eq!(ms.range(), (1u128 << (3 * n)) - (1u128 << n));
            assert!(ms.crt_constants_hold());
        }
        assert!(ModuliSet::new(MAX_CHANNEL_SIZE)
            .unwrap()
            .crt_constants_hold());
    }

    #[test]
    fn value_examples() {
        assert_eq!(sd(&[-1, 0, 1]).value(), 3);
        assert_eq!(SdVector::zero(8).value(), 0);
        assert_eq!(sd(&[1, 1, 1]).value(), 7);
        assert_eq!(sd(&[1; 127]).value(), i128::MAX);
    }

    #[test]
    fn from_int_examples() {
        assert_eq!(SdVector::from_int(5, 4).unwrap().digits(), &[1, 0, 1, 0]);
        let v = SdVector::from_int(-3, 3).unwrap();
        assert_eq!(v.digits(), &[-1, -1, 0]);
        assert_eq!(v.value(), -3);
        assert!(matches!(
            SdVector::from_int(8, 3),
            Err(Error::OutOfRange { .. })
        ));
        assert!(SdVector::from_int(-8, 3).is_err());
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(matches!(SdVector::new(vec![0, 2]), Err(Error::Domain(_))));
        assert!(SdVector::new(vec![0; 128]).is_err());
    }

    #[test]
    fn canonical_residue_examples() {
        assert_eq!(sd(&[-1, 0, 0]).canonical_residue(9), 8);
        assert_eq!(SdVector::zero(3).canonical_residue(7), 0);
        assert_eq!(sd(&[1, 0, 1]).canonical_residue(7), 5);
    }

    #[test]
    fn round_trip_small_widths() {
        for w in 0..=8usize {
            let lim = (1i128 << w) - 1;
            for v in -lim..=lim {
                assert_eq!(SdVector::from_int(v, w).unwrap().value(), v);
            }
        }
    }

    #[test]
    fn redundancy_witness_exists() {
        for w in 2..=5 {
            let mut seen = std::collections::HashMap::new();
            let found = SdVector::enumerate(w).any(|v| {
                let val = v.value();
                match seen.insert(val, v.clone()) {
                    Some(prev) => prev != v,
                    None => false,
                }
            });
            assert!(found, "no redundant pair at width {w}");
        }
    }

    #[test]
    fn display_is_msb_first() {
        assert_eq!(sd(&[-1, 1, 0]).to_string(), "[0 1 -1]");
    }

    #[test]
    fn residue_tuple_bounds() {
        let ms = ModuliSet::new(3).unwrap();
        assert!(ResidueTuple::new([6, 7, 8], ms).is_ok());
        assert!(ResidueTuple::new([7, 0, 0], ms).is_err());
        assert!(SdResidueTuple::new(
            [SdVector::zero(3), SdVector::zero(3), SdVector::zero(2)],
            ms
        )
        .is_err());
    }
}
