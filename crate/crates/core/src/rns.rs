//! Residue arithmetic over `{2^n - 1, 2^n, 2^n + 1}`: forward conversion,
//! CRT reverse conversion, word-level channel arithmetic and radix-4 Booth
//! recoding.

use crate::error::{Error, Result};
use crate::numeral::{ModuliSet, ResidueTuple};

fn check_in_range(x: u128, ms: &ModuliSet) -> Result<()> {
    if x >= ms.range() {
        return Err(Error::out_of_range(
            x,
            format!("[0, {}) for n = {}", ms.range(), ms.n()),
        ));
    }
    Ok(())
}

/// `X mod m_i` on each channel.
pub fn forward_convert(x: u128, ms: &ModuliSet) -> Result<ResidueTuple> {
    check_in_range(x, ms)?;
    let residues = ms.moduli().map(|m| (x % m as u128) as u64);
    ResidueTuple::new(residues, *ms)
}

/// Forward conversion from three `n`-bit blocks `B2 B1 B0` of `X`, using
/// `2^n = 1 (mod 2^n - 1)` and `2^n = -1 (mod 2^n + 1)`.
pub fn forward_convert_blocks(x: u128, ms: &ModuliSet) -> Result<ResidueTuple> {
    check_in_range(x, ms)?;
    let n = ms.n();
    let mask = (1u128 << n) - 1;
    let [b0, b1, b2] = [0, 1, 2].map(|k| ((x >> (k * n)) & mask) as u64);
    let [m1, _, m3] = ms.moduli();

    // the blocks are at most 2^n - 1, so these fit comfortably in u64
    let r1 = (b0 + b1 + b2) % m1;
    let r2 = b0;
    let r3 = (b0 + b2 + m3 - b1) % m3;
    ResidueTuple::new([r1, r2, r3], *ms)
}

/// CRT reconstruction `X = (sum r_i N_i inv(N_i)) mod M`.
pub fn reverse_convert(r: &ResidueTuple) -> u128 {
    let ms = r.moduli();
    let range = ms.range();
    ms.crt_constants()
        .iter()
        .zip(r.residues())
        .zip(ms.moduli())
        .fold(0u128, |acc, ((c, ri), m)| {
            // reduce r_i * inv first so the cofactor product stays below M
            let k = (ri as u128 * c.inverse as u128) % m as u128;
            (acc + c.cofactor * k) % range
        })
}

fn check_operand(v: u64, m: u64) -> Result<()> {
    if v >= m {
        return Err(Error::Domain(format!(
            "operand {v} is not below modulus {m}"
        )));
    }
    Ok(())
}

pub fn mod_add(a: u64, b: u64, m: u64) -> Result<u64> {
    check_operand(a, m)?;
    check_operand(b, m)?;
    Ok(((a as u128 + b as u128) % m as u128) as u64)
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> Result<u64> {
    check_operand(a, m)?;
    check_operand(b, m)?;
    Ok((a as u128 * b as u128 % m as u128) as u64)
}

/// Channelwise [`mod_add`] of two residue tuples over the same moduli set.
pub fn rns_add(a: &ResidueTuple, b: &ResidueTuple) -> Result<ResidueTuple> {
    channelwise(a, b, mod_add)
}

/// Channelwise [`mod_mul`].
pub fn rns_mul(a: &ResidueTuple, b: &ResidueTuple) -> Result<ResidueTuple> {
    channelwise(a, b, mod_mul)
}

fn channelwise(
    a: &ResidueTuple,
    b: &ResidueTuple,
    op: fn(u64, u64, u64) -> Result<u64>,
) -> Result<ResidueTuple> {
    if a.moduli() != b.moduli() {
        return Err(Error::Shape(
            "residue tuples use different moduli sets".into(),
        ));
    }
    let ms = *a.moduli();
    let (ra, rb, m) = (a.residues(), b.residues(), ms.moduli());
    let mut out = [0u64; 3];
    for i in 0..3 {
        out[i] = op(ra[i], rb[i], m[i])?;
    }
    ResidueTuple::new(out, ms)
}

/// Radix-4 Booth digits in `{-2, ..., 2}`, index `j` weighing `4^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoothDigits {
    digits: Vec<i8>,
}

impl BoothDigits {
    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `sum d_j 4^j`.
    pub fn value(&self) -> i128 {
        self.digits
            .iter()
            .rev()
            .fold(0i128, |acc, &d| acc * 4 + d as i128)
    }
}

/// Recodes a `p`-bit unsigned operand (zero-extended) into
/// `ceil((p + 1) / 2)` digits `d_j = -2 b_(2j+1) + b_(2j) + b_(2j-1)`.
pub fn booth_recode(y: u64, p: u32) -> Result<BoothDigits> {
    if p > 64 {
        return Err(Error::Domain(format!("bit width {p} exceeds 64")));
    }
    if p < 64 && y >> p != 0 {
        return Err(Error::Domain(format!("{y} does not fit in {p} bits")));
    }
    let bit = |k: i64| -> i8 {
        if (0..64).contains(&k) {
            ((y >> k) & 1) as i8
        } else {
            0
        }
    };
    let count = (p as i64 + 2) / 2;
    let digits = (0..count)
        .map(|j| -2 * bit(2 * j + 1) + bit(2 * j) + bit(2 * j - 1))
        .collect();
    Ok(BoothDigits { digits })
}
