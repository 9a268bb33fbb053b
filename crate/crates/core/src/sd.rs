//! Non-modular signed-digit arithmetic: carry-limited addition, negation, and
//! shift-add multiplication.
//!
//! Addition follows the two-step transfer/interim scheme. Every position forms
//! `p_i = a_i + b_i` and splits it into a transfer `t_{i+1}` sent upward and an
//! interim digit `w_i` kept locally, with `2 t_{i+1} + w_i = p_i`. The split
//! for `p_i = +-1` looks at the raw neighbour sum `p_{i-1}` so the incoming
//! transfer never has the same sign as `w_i`, and `s_i = w_i + t_i` always
//! stays a digit. Output digit `i` therefore depends on input positions `i`,
//! `i - 1` and `i - 2` only.

use crate::error::{Error, Result};
use crate::numeral::{SdVector, MAX_SD_WIDTH};

/// Output of one adder cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferInterim {
    /// Digit sent to position `i + 1`.
    pub transfer: i8,
    /// Digit kept at position `i`.
    pub interim: i8,
}

/// Splits the position sum `p` given the neighbour's raw sum `prev`.
#[inline]
pub fn split_position_sum(p: i8, prev: i8) -> TransferInterim {
    let (transfer, interim) = match p {
        2 => (1, 0),
        -2 => (-1, 0),
        0 => (0, 0),
        1 if prev <= -1 => (0, 1),
        1 => (1, -1),
        -1 if prev >= 1 => (0, -1),
        -1 => (-1, 1),
        _ => unreachable!("position sum {p} outside [-2, 2]"),
    };
    TransferInterim { transfer, interim }
}

/// Per-position record of a single-pass addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddTrace {
    pub position_sums: Vec<i8>,
    pub cells: Vec<TransferInterim>,
    /// `s_i = w_i + t_i` before any digit check, one per input position.
    pub raw_sums: Vec<i8>,
}

impl AddTrace {
    /// Positions whose raw sum left `{-1, 0, 1}` and would need another
    /// carry pass.
    pub fn secondary_carries(&self) -> usize {
        self.raw_sums
            .iter()
            .filter(|s| !(-1..=1).contains(*s))
            .count()
    }

    /// The transfer leaving the top position.
    pub fn top_transfer(&self) -> i8 {
        self.cells.last().map_or(0, |c| c.transfer)
    }
}

/// Runs the cells over `p`. `low_prev` stands in for `p_{-1}` and `low_transfer`
/// maps the top transfer to the transfer entering position 0.
pub(crate) fn run_cells(
    position_sums: Vec<i8>,
    low_prev: impl Fn(&[i8]) -> i8,
    low_transfer: impl Fn(i8) -> i8,
) -> AddTrace {
    let w = position_sums.len();
    let mut cells = Vec::with_capacity(w);
    for i in 0..w {
        let prev = if i == 0 {
            low_prev(&position_sums)
        } else {
            position_sums[i - 1]
        };
        cells.push(split_position_sum(position_sums[i], prev));
    }
    let wrap = low_transfer(cells.last().map_or(0, |c: &TransferInterim| c.transfer));
    let raw_sums = (0..w)
        .map(|i| {
            let incoming = if i == 0 { wrap } else { cells[i - 1].transfer };
            cells[i].interim + incoming
        })
        .collect();
    AddTrace {
        position_sums,
        cells,
        raw_sums,
    }
}

fn position_sums(a: &[i8], b: &[i8]) -> Vec<i8> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Single-pass trace of `sd_add` for inspection.
pub fn sd_add_trace(a: &SdVector, b: &SdVector) -> Result<AddTrace> {
    check_same_width(a, b)?;
    Ok(run_cells(
        position_sums(a.digits(), b.digits()),
        |_| 0,
        |_| 0,
    ))
}

fn add_digits(a: &[i8], b: &[i8]) -> Vec<i8> {
    debug_assert_eq!(a.len(), b.len());
    let trace = run_cells(position_sums(a, b), |_| 0, |_| 0);
    debug_assert_eq!(trace.secondary_carries(), 0);
    let top = trace.top_transfer();
    let mut digits = trace.raw_sums;
    digits.push(top);
    digits
}

pub(crate) fn check_same_width(a: &SdVector, b: &SdVector) -> Result<()> {
    if a.width() != b.width() {
        return Err(Error::Shape(format!(
            "operand widths differ: {} vs {}",
            a.width(),
            b.width()
        )));
    }
    Ok(())
}

/// Exact sum of two equal-width vectors; the result is one digit wider.
pub fn sd_add(a: &SdVector, b: &SdVector) -> Result<SdVector> {
    check_same_width(a, b)?;
    if a.width() + 1 > MAX_SD_WIDTH {
        return Err(Error::Shape(format!(
            "sum width {} exceeds {MAX_SD_WIDTH}",
            a.width() + 1
        )));
    }
    Ok(SdVector::from_digits_unchecked(add_digits(
        a.digits(),
        b.digits(),
    )))
}

pub fn sd_negate(a: &SdVector) -> SdVector {
    SdVector::from_digits_unchecked(a.digits().iter().map(|d| -d).collect())
}

/// Rewrites `digits` to `width` positions without changing the value.
///
/// A nonzero top digit `d` followed (after zeros) by `-d` at position `j`
/// equals `d` repeated over positions `j..top`, so the top position can be
/// cleared locally. Fails if the value needs more than `width` digits.
fn narrow(mut digits: Vec<i8>, width: usize) -> Option<Vec<i8>> {
    while digits.len() > width {
        let top = digits.len() - 1;
        let d = digits[top];
        if d != 0 {
            let j = (0..top).rev().find(|&j| digits[j] != 0)?;
            if digits[j] != -d {
                return None;
            }
            for digit in &mut digits[j..top] {
                *digit = d;
            }
        }
        digits.pop();
    }
    Some(digits)
}

fn reduce_tree(mut rows: Vec<Vec<i8>>) -> Vec<i8> {
    while rows.len() > 1 {
        let mut next = Vec::with_capacity(rows.len().div_ceil(2));
        let mut it = rows.into_iter();
        while let Some(x) = it.next() {
            match it.next() {
                Some(y) => next.push(add_digits(&x, &y)),
                None => {
                    let mut x = x;
                    // keep widths aligned with the summed rows of this level
                    x.push(0);
                    next.push(x);
                }
            }
        }
        rows = next;
    }
    rows.pop().unwrap_or_default()
}

/// Exact product of two vectors; the result width is `wa + wb`.
///
/// One partial product per digit of `a` (zero, `b`, or `-b`, shifted by the
/// digit's position), summed by a balanced tree of [`sd_add`].
pub fn sd_mul(a: &SdVector, b: &SdVector) -> Result<SdVector> {
    let width = a.width() + b.width();
    if width > MAX_SD_WIDTH {
        return Err(Error::Shape(format!(
            "product width {width} exceeds {MAX_SD_WIDTH}"
        )));
    }
    let rows: Vec<Vec<i8>> = a
        .digits()
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            let mut row = vec![0i8; width];
            for (k, &bk) in b.digits().iter().enumerate() {
                row[i + k] = ai * bk;
            }
            row
        })
        .collect();
    if rows.is_empty() {
        return Ok(SdVector::zero(width));
    }
    let sum = reduce_tree(rows);
    let digits = narrow(sum, width).expect("product magnitude fits wa + wb digits");
    Ok(SdVector::from_digits_unchecked(digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sd(d: &[i8]) -> SdVector {
        SdVector::new(d.to_vec()).unwrap()
    }

    fn sd_vec(max_width: usize) -> impl Strategy<Value = SdVector> {
        (1..=max_width).prop_flat_map(|w| {
            prop::collection::vec(-1i8..=1, w).prop_map(|d| SdVector::new(d).unwrap())
        })
    }

    #[test]
    fn add_examples() {
        let s = sd_add(&sd(&[1, 0, 1]), &sd(&[1, 1, 0])).unwrap();
        assert_eq!(s.digits(), &[0, 0, 0, 1]);
        assert_eq!(s.value(), 8);

        let a = sd(&[1, -1, 0, 1]);
        assert_eq!(sd_add(&a, &SdVector::zero(4)).unwrap().value(), a.value());
        assert_eq!(sd_add(&sd(&[-1]), &sd(&[1])).unwrap().value(), 0);
    }

    #[test]
    fn add_rejects_width_mismatch() {
        assert!(matches!(
            sd_add(&SdVector::zero(3), &SdVector::zero(4)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn add_exhaustive_small_widths() {
        for w in 0..=5 {
            let all: Vec<_> = SdVector::enumerate(w).collect();
            for a in &all {
                for b in &all {
                    let trace = sd_add_trace(a, b).unwrap();
                    assert_eq!(trace.secondary_carries(), 0);
                    for (c, &p) in trace.cells.iter().zip(&trace.position_sums) {
                        assert_eq!(2 * c.transfer + c.interim, p);
                        assert!((-1..=1).contains(&c.transfer));
                        assert!((-1..=1).contains(&c.interim));
                    }
                    assert_eq!(sd_add(a, b).unwrap().value(), a.value() + b.value());
                }
            }
        }
    }

    #[test]
    fn negate_examples() {
        assert_eq!(sd_negate(&sd(&[1, 0, -1])).digits(), &[-1, 0, 1]);
        assert!(sd_negate(&SdVector::zero(4)).is_zero());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(sd_mul(&sd(&[1, 1]), &sd(&[0, -1])).unwrap().value(), -6);
        assert_eq!(
            sd_mul(&sd(&[1, -1, 1]), &SdVector::zero(3))
                .unwrap()
                .value(),
            0
        );
        let p = sd_mul(&sd(&[1, 0, 1]), &sd(&[1, 0, 1])).unwrap();
        assert_eq!(p.width(), 6);
        assert_eq!(p.value(), 25);
    }

    #[test]
    fn mul_exhaustive_small_widths() {
        for wa in 0..=4 {
            for wb in 0..=4 {
                for a in SdVector::enumerate(wa) {
                    for b in SdVector::enumerate(wb) {
                        let p = sd_mul(&a, &b).unwrap();
                        assert_eq!(p.width(), wa + wb);
                        assert_eq!(p.value(), a.value() * b.value());
                    }
                }
            }
        }
    }

    #[test]
    fn narrow_preserves_value() {
        // [1 -1 0 0] MSB-first = 8 - 4 = 4
        assert_eq!(narrow(vec![0, 0, -1, 1], 3), Some(vec![0, 0, 1]));
        assert_eq!(narrow(vec![0, 0, 1, 1], 3), None);
    }

    proptest! {
        #[test]
        fn add_matches_integers(
            (a, b) in (1usize..=64).prop_flat_map(|w| (
                prop::collection::vec(-1i8..=1, w),
                prop::collection::vec(-1i8..=1, w),
            ))
        ) {
            let a = SdVector::new(a).unwrap();
            let b = SdVector::new(b).unwrap();
            prop_assert_eq!(sd_add(&a, &b).unwrap().value(), a.value() + b.value());
        }

        #[test]
        fn negate_is_involution(a in sd_vec(64)) {
            prop_assert_eq!(sd_negate(&sd_negate(&a)), a.clone());
            prop_assert_eq!(sd_negate(&a).value(), -a.value());
        }

        #[test]
        fn mul_commutes_in_value(a in sd_vec(40), b in sd_vec(40)) {
            let ab = sd_mul(&a, &b).unwrap();
            let ba = sd_mul(&b, &a).unwrap();
            prop_assert_eq!(ab.value(), ba.value());
            prop_assert_eq!(ab.value(), a.value() * b.value());
        }
    }
}
