//! Signed-digit residue arithmetic: modular rotation, end-around signed-digit
//! addition, and rotation-driven modular multiplication on each channel of
//! `{2^p - 1, 2^p, 2^p + 1}`.
//!
//! Digit vectors are stored least-significant first, whereas the rotation rules
//! are usually written most-significant first. For `y = [y2 y1 y0]` (MSB-first)
//! and `a = 1`:
//!
//! | modulus   | MSB-first result   | LSB-first storage        |
//! |-----------|--------------------|--------------------------|
//! | `2^p - 1` | `[y1 y0 y2]`       | `[y2, y0, y1]`           |
//! | `2^p`     | `[y1 y0 0]`        | `[0, y0, y1]`            |
//! | `2^p + 1` | `[y1 y0 -y2]`      | `[-y2, y0, y1]`          |
//!
//! so stored index `k` of the result reads `y[(k - a) mod p]`, zeroed (for
//! `2^p`) or negated (for `2^p + 1`) when `k < a`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeral::{Channel, ModuliSet, SdResidueTuple, SdVector};
use crate::rns::{forward_convert, reverse_convert};
use crate::sd::{run_cells, sd_negate, AddTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModulusForm {
    /// `2^p - 1`
    PowerMinusOne,
    /// `2^p`
    Power,
    /// `2^p + 1`
    PowerPlusOne,
}

impl ModulusForm {
    pub const ALL: [ModulusForm; 3] = [
        ModulusForm::PowerMinusOne,
        ModulusForm::Power,
        ModulusForm::PowerPlusOne,
    ];
}

/// A channel's modulus form together with its digit width `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelKind {
    form: ModulusForm,
    p: usize,
}

impl ChannelKind {
    pub fn new(form: ModulusForm, p: usize) -> Result<Self> {
        if !(2..=62).contains(&p) {
            return Err(Error::Shape(format!("channel width {p} outside [2, 62]")));
        }
        Ok(ChannelKind { form, p })
    }

    pub fn for_channel(ms: &ModuliSet, ch: Channel) -> Self {
        let form = match ch {
            Channel::MinusOne => ModulusForm::PowerMinusOne,
            Channel::Power => ModulusForm::Power,
            Channel::PlusOne => ModulusForm::PowerPlusOne,
        };
        ChannelKind {
            form,
            p: ms.n() as usize,
        }
    }

    pub fn form(&self) -> ModulusForm {
        self.form
    }

    pub fn width(&self) -> usize {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        let pow = 1u64 << self.p;
        match self.form {
            ModulusForm::PowerMinusOne => pow - 1,
            ModulusForm::Power => pow,
            ModulusForm::PowerPlusOne => pow + 1,
        }
    }

    fn check_width(&self, v: &SdVector) -> Result<()> {
        if v.width() != self.p {
            return Err(Error::Shape(format!(
                "operand width {} does not match channel width {}",
                v.width(),
                self.p
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.form {
            ModulusForm::PowerMinusOne => " - 1",
            ModulusForm::Power => "",
            ModulusForm::PowerPlusOne => " + 1",
        };
        write!(f, "2^{}{sign}", self.p)
    }
}

/// Multiplies by `2^a` modulo the channel's modulus by rewiring digits.
pub fn rotate_mod(y: &SdVector, a: usize, ch: ChannelKind) -> Result<SdVector> {
    ch.check_width(y)?;
    let p = ch.p;
    if a > p {
        return Err(Error::Shape(format!("shift {a} exceeds channel width {p}")));
    }
    let src = y.digits();
    let digits = (0..p)
        .map(|k| {
            let d = src[(k + p - a) % p];
            if k >= a {
                d
            } else {
                match ch.form {
                    ModulusForm::PowerMinusOne => d,
                    ModulusForm::Power => 0,
                    ModulusForm::PowerPlusOne => -d,
                }
            }
        })
        .collect();
    Ok(SdVector::from_digits_unchecked(digits))
}

/// Single-pass trace of [`sd_mod_add`]; the top transfer wraps to position 0
/// with weight `2^p mod m`.
pub fn sd_mod_add_trace(a: &SdVector, b: &SdVector, ch: ChannelKind) -> Result<AddTrace> {
    ch.check_width(a)?;
    ch.check_width(b)?;
    let sums = a
        .digits()
        .iter()
        .zip(b.digits())
        .map(|(x, y)| x + y)
        .collect();
    let trace = match ch.form {
        ModulusForm::Power => run_cells(sums, |_| 0, |_| 0),
        ModulusForm::PowerMinusOne => run_cells(sums, |p| p[p.len() - 1], |t| t),
        ModulusForm::PowerPlusOne => run_cells(sums, |p| -p[p.len() - 1], |t| -t),
    };
    Ok(trace)
}

/// Constant-depth modular signed-digit addition with end-around transfer.
pub fn sd_mod_add(a: &SdVector, b: &SdVector, ch: ChannelKind) -> Result<SdVector> {
    let trace = sd_mod_add_trace(a, b, ch)?;
    debug_assert_eq!(trace.secondary_carries(), 0);
    Ok(SdVector::from_digits_unchecked(trace.raw_sums))
}

/// Modular product: one rotated partial product per digit of `a`, reduced by a
/// balanced tree of [`sd_mod_add`].
pub fn sd_mod_mul(a: &SdVector, b: &SdVector, ch: ChannelKind) -> Result<SdVector> {
    ch.check_width(a)?;
    ch.check_width(b)?;
    let neg_b = sd_negate(b);
    let mut rows = Vec::with_capacity(ch.p);
    for (i, &ai) in a.digits().iter().enumerate() {
        let row = match ai {
            0 => SdVector::zero(ch.p),
            1 => rotate_mod(b, i, ch)?,
            _ => rotate_mod(&neg_b, i, ch)?,
        };
        rows.push(row);
    }
    while rows.len() > 1 {
        let mut next = Vec::with_capacity(rows.len().div_ceil(2));
        let mut it = rows.into_iter();
        while let Some(x) = it.next() {
            match it.next() {
                Some(y) => next.push(sd_mod_add(&x, &y, ch)?),
                None => next.push(x),
            }
        }
        rows = next;
    }
    Ok(rows.pop().unwrap_or_else(|| SdVector::zero(ch.p)))
}

/// Forward-converts `x` and embeds each residue as an `n`-digit vector. The
/// residue `2^n` of the `2^n + 1` channel is stored as the congruent `-1`.
pub fn encode(x: u128, ms: &ModuliSet) -> Result<SdResidueTuple> {
    let r = forward_convert(x, ms)?;
    let n = ms.n() as usize;
    let channels = Channel::ALL.map(|ch| {
        let res = r.residue(ch);
        let v = if res >> n != 0 { -1 } else { res as i128 };
        SdVector::from_int(v, n).expect("embedded residue fits n digits")
    });
    SdResidueTuple::new(channels, *ms)
}

/// Canonicalizes every channel and reverse-converts.
pub fn decode(t: &SdResidueTuple) -> u128 {
    reverse_convert(&t.canonical())
}

fn channelwise(
    a: &SdResidueTuple,
    b: &SdResidueTuple,
    op: fn(&SdVector, &SdVector, ChannelKind) -> Result<SdVector>,
) -> Result<SdResidueTuple> {
    if a.moduli() != b.moduli() {
        return Err(Error::Shape(
            "residue tuples use different moduli sets".into(),
        ));
    }
    let ms = *a.moduli();
    let mut out = Vec::with_capacity(3);
    for ch in Channel::ALL {
        out.push(op(
            a.channel(ch),
            b.channel(ch),
            ChannelKind::for_channel(&ms, ch),
        )?);
    }
    let channels: [SdVector; 3] = out.try_into().expect("three channels");
    SdResidueTuple::new(channels, ms)
}

/// Channelwise [`sd_mod_add`]; decodes to `(X + Y) mod M`.
pub fn sdrns_add(a: &SdResidueTuple, b: &SdResidueTuple) -> Result<SdResidueTuple> {
    channelwise(a, b, sd_mod_add)
}

/// Channelwise [`sd_mod_mul`]; decodes to `(X * Y) mod M`.
pub fn sdrns_mul(a: &SdResidueTuple, b: &SdResidueTuple) -> Result<SdResidueTuple> {
    channelwise(a, b, sd_mod_mul)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sd(d: &[i8]) -> SdVector {
        SdVector::new(d.to_vec()).unwrap()
    }

    fn kind(form: ModulusForm, p: usize) -> ChannelKind {
        ChannelKind::new(form, p).unwrap()
    }

    use ModulusForm::*;

    #[test]
    fn rotation_examples() {
        let y = sd(&[1, 0, 1]);
        let r = rotate_mod(&y, 1, kind(PowerMinusOne, 3)).unwrap();
        assert_eq!(r.digits(), &[1, 1, 0]);
        assert_eq!(r.value(), 3);
        let r = rotate_mod(&y, 1, kind(Power, 3)).unwrap();
        assert_eq!(r.digits(), &[0, 1, 0]);
        let r = rotate_mod(&y, 1, kind(PowerPlusOne, 3)).unwrap();
        assert_eq!(r.digits(), &[-1, 1, 0]);
        assert_eq!(r.value(), 1);
        for form in ModulusForm::ALL {
            assert_eq!(rotate_mod(&y, 0, kind(form, 3)).unwrap(), y);
        }
    }

    #[test]
    fn rotation_errors() {
        let y = sd(&[1, 0, 1]);
        assert!(matches!(
            rotate_mod(&y, 4, kind(Power, 3)),
            Err(Error::Shape(_))
        ));
        assert!(rotate_mod(&y, 1, kind(Power, 4)).is_err());
    }

    #[test]
    fn rotation_full_width() {
        let y = sd(&[1, -1, 0, 1]);
        let v = y.value();
        assert_eq!(rotate_mod(&y, 4, kind(PowerMinusOne, 4)).unwrap(), y);
        assert!(rotate_mod(&y, 4, kind(Power, 4)).unwrap().is_zero());
        assert_eq!(
            rotate_mod(&y, 4, kind(PowerPlusOne, 4)).unwrap().value(),
            -v
        );
    }

    #[test]
    fn mod_add_examples() {
        let s = sd_mod_add(&sd(&[1, 0, 1]), &sd(&[0, 0, 1]), kind(PowerMinusOne, 3)).unwrap();
        assert_eq!(s.digits(), &[0, 1, 0]);
        let s = sd_mod_add(&sd(&[-1, 0, 0]), &sd(&[0, 1, 0]), kind(PowerPlusOne, 3)).unwrap();
        assert_eq!(s.digits(), &[1, 0, 0]);
        for form in ModulusForm::ALL {
            let ch = kind(form, 3);
            let a = sd(&[1, -1, 1]);
            let s = sd_mod_add(&a, &SdVector::zero(3), ch).unwrap();
            assert_eq!(
                s.canonical_residue(ch.modulus()),
                a.canonical_residue(ch.modulus())
            );
        }
        assert!(sd_mod_add(&sd(&[1, 0]), &sd(&[0, 0, 1]), kind(Power, 3)).is_err());
    }

    #[test]
    fn mod_mul_examples() {
        let five = SdVector::from_int(5, 3).unwrap();
        let four = SdVector::from_int(4, 3).unwrap();
        let seven = SdVector::from_int(7, 3).unwrap();
        let ch = kind(PowerMinusOne, 3);
        assert_eq!(
            sd_mod_mul(&five, &four, ch).unwrap().canonical_residue(7),
            6
        );
        let ch = kind(PowerPlusOne, 3);
        assert_eq!(
            sd_mod_mul(&five, &seven, ch).unwrap().canonical_residue(9),
            8
        );
        for form in ModulusForm::ALL {
            let ch = kind(form, 3);
            let z = sd_mod_mul(&five, &SdVector::zero(3), ch).unwrap();
            assert_eq!(z.canonical_residue(ch.modulus()), 0);
        }
    }

    #[test]
    fn mod_ops_exhaustive_small() {
        for p in 2..=4 {
            for form in ModulusForm::ALL {
                let ch = kind(form, p);
                let m = ch.modulus() as i128;
                let all: Vec<_> = SdVector::enumerate(p).collect();
                for a in &all {
                    for b in &all {
                        let t = sd_mod_add_trace(a, b, ch).unwrap();
                        assert_eq!(t.secondary_carries(), 0, "{a:?} + {b:?} on {ch}");
                        let s = sd_mod_add(a, b, ch).unwrap();
                        assert_eq!(
                            s.value().rem_euclid(m),
                            (a.value() + b.value()).rem_euclid(m)
                        );
                        let q = sd_mod_mul(a, b, ch).unwrap();
                        assert_eq!(
                            q.value().rem_euclid(m),
                            (a.value() * b.value()).rem_euclid(m)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn encode_decode_examples() {
        let ms = ModuliSet::new(3).unwrap();
        let t = encode(100, &ms).unwrap();
        assert_eq!(t.canonical().residues(), [2, 4, 1]);
        assert_eq!(decode(&t), 100);
        assert!(encode(0, &ms)
            .unwrap()
            .channels()
            .iter()
            .all(|c| c.is_zero()));
        assert_eq!(decode(&encode(503, &ms).unwrap()), 503);
        assert!(encode(504, &ms).is_err());

        // X = 8 leaves residue 2^3 on the 2^3 + 1 channel
        let t = encode(8, &ms).unwrap();
        assert_eq!(t.channel(Channel::PlusOne).digits(), &[-1, 0, 0]);
        assert_eq!(decode(&t), 8);
    }

    proptest! {
        #[test]
        fn wide_channel_congruence(
            p in 5usize..=20,
            seed_a in prop::collection::vec(-1i8..=1, 20),
            seed_b in prop::collection::vec(-1i8..=1, 20),
            form_idx in 0usize..3,
        ) {
            let ch = kind(ModulusForm::ALL[form_idx], p);
            let a = SdVector::new(seed_a[..p].to_vec()).unwrap();
            let b = SdVector::new(seed_b[..p].to_vec()).unwrap();
            let m = ch.modulus() as i128;
            let s = sd_mod_add(&a, &b, ch).unwrap();
            prop_assert_eq!(s.value().rem_euclid(m), (a.value() + b.value()).rem_euclid(m));
            let q = sd_mod_mul(&a, &b, ch).unwrap();
            prop_assert_eq!(q.value().rem_euclid(m), (a.value() * b.value()).rem_euclid(m));
        }

        #[test]
        fn sdrns_ring_homomorphism(n in 3u32..=12, x in any::<u64>(), y in any::<u64>()) {
            let ms = ModuliSet::new(n).unwrap();
            let big_m = ms.range();
            let (x, y) = (x as u128 % big_m, y as u128 % big_m);
            let (ex, ey) = (encode(x, &ms).unwrap(), encode(y, &ms).unwrap());
            prop_assert_eq!(decode(&sdrns_add(&ex, &ey).unwrap()), (x + y) % big_m);
            prop_assert_eq!(decode(&sdrns_mul(&ex, &ey).unwrap()), (x * y) % big_m);
        }
    }
}
