//! Self-checks of the arithmetic against integer oracles, at exhaustive or
//! randomized scale.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeral::{ModuliSet, SdVector};
use crate::rns::{forward_convert, forward_convert_blocks, reverse_convert};
use crate::sd::{sd_add, sd_add_trace};
use crate::sdrns::{
    decode, encode, rotate_mod, sd_mod_add, sd_mod_add_trace, sd_mod_mul, sdrns_add, sdrns_mul,
    ChannelKind, ModulusForm,
};

/// Largest channel size accepted in exhaustive mode.
pub const MAX_EXHAUSTIVE_N: u32 = 4;
/// Operand width of the randomized carry-locality trials.
pub const LOCALITY_WIDTH: usize = 32;

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Random { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: u64,
    pub failures: u64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: u32,
    pub mode: VerifyMode,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            VerifyMode::Exhaustive => "exhaustive".to_string(),
            VerifyMode::Random { trials, seed } => format!("random, {trials} trials, seed {seed}"),
        };
        writeln!(f, "verify n={} ({mode})", self.n)?;
        for s in &self.suites {
            let status = if s.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "  {status}  {:<22} {:>10} checked  {:>6} failed",
                s.name, s.checked, s.failures
            )?;
        }
        let overall = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{overall}")
    }
}

/// Runs every suite for channel size `n`.
pub fn run(n: u32, mode: VerifyMode, exec: Execution) -> Result<VerifyReport> {
    if mode == VerifyMode::Exhaustive && n > MAX_EXHAUSTIVE_N {
        return Err(Error::Config(format!(
            "exhaustive verification is limited to n <= {MAX_EXHAUSTIVE_N}; use random trials for n = {n}"
        )));
    }
    let ms = ModuliSet::new(n)?;
    let suites = match mode {
        VerifyMode::Exhaustive => vec![
            round_trip_all(&ms, exec),
            channel_grid("sd-rns add", &ms, exec, add_ok),
            channel_grid("sd-rns mul", &ms, exec, mul_ok),
            channel_grid("single-pass add", &ms, exec, single_pass_ok),
            rotation_all(&ms, exec),
            locality_all(n as usize, exec),
            homomorphism_grid(&ms, exec),
        ],
        VerifyMode::Random { trials, seed } => vec![
            round_trip_random(&ms, trials, seed, exec),
            channel_random("sd-rns add", &ms, trials, seed, exec, add_ok),
            channel_random("sd-rns mul", &ms, trials, seed, exec, mul_ok),
            channel_random("single-pass add", &ms, trials, seed, exec, single_pass_ok),
            rotation_random(&ms, trials, seed, exec),
            locality_random(LOCALITY_WIDTH, trials, seed, exec),
            homomorphism_random(&ms, trials, seed, exec),
        ],
    };
    Ok(VerifyReport { n, mode, suites })
}

fn kinds(ms: &ModuliSet) -> [ChannelKind; 3] {
    ModulusForm::ALL.map(|f| ChannelKind::new(f, ms.n() as usize).expect("valid channel"))
}

fn fails(ok: bool) -> u64 {
    u64::from(!ok)
}

/// Random trials split into fixed-size chunks, each with its own ChaCha
/// stream, so the outcome is independent of the execution mode.
fn random_failures<F>(trials: u64, seed: u64, tag: u64, exec: Execution, check: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> u64 + Sync + Send,
{
    let trials = trials as usize;
    exec.sum_range(0..trials.div_ceil(CHUNK), |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tag << 40 | chunk as u64);
        let len = CHUNK.min(trials - chunk * CHUNK);
        (0..len).map(|_| check(&mut rng)).sum()
    })
}

fn random_sd(rng: &mut ChaCha8Rng, width: usize) -> SdVector {
    SdVector::new((0..width).map(|_| rng.gen_range(-1i8..=1)).collect()).expect("valid digits")
}

fn round_trip_ok(x: u128, ms: &ModuliSet) -> bool {
    let Ok(r) = forward_convert(x, ms) else {
        return false;
    };
    forward_convert_blocks(x, ms).ok() == Some(r)
        && reverse_convert(&r) == x
        && encode(x, ms).map(|t| decode(&t)).ok() == Some(x)
}

fn round_trip_all(ms: &ModuliSet, exec: Execution) -> SuiteResult {
    let m = ms.range() as usize;
    SuiteResult {
        name: "round-trip",
        checked: m as u64,
        failures: exec.sum_range(0..m, |x| fails(round_trip_ok(x as u128, ms))),
    }
}

fn round_trip_random(ms: &ModuliSet, trials: u64, seed: u64, exec: Execution) -> SuiteResult {
    SuiteResult {
        name: "round-trip",
        checked: trials,
        failures: random_failures(trials, seed, 1, exec, |rng| {
            fails(round_trip_ok(rng.gen_range(0..ms.range()), ms))
        }),
    }
}

fn add_ok(a: &SdVector, b: &SdVector, ch: ChannelKind) -> bool {
    let m = ch.modulus() as i128;
    sd_mod_add(a, b, ch)
        .is_ok_and(|s| s.value().rem_euclid(m) == (a.value() + b.value()).rem_euclid(m))
}

fn mul_ok(a: &SdVector, b: &SdVector, ch: ChannelKind) -> bool {
    let m = ch.modulus() as i128;
    sd_mod_mul(a, b, ch)
        .is_ok_and(|s| s.value().rem_euclid(m) == (a.value() * b.value()).rem_euclid(m))
}

fn single_pass_ok(a: &SdVector, b: &SdVector, ch: ChannelKind) -> bool {
    sd_mod_add_trace(a, b, ch).is_ok_and(|t| {
        t.secondary_carries() == 0
            && t.cells
                .iter()
                .zip(&t.position_sums)
                .all(|(c, &p)| 2 * c.transfer + c.interim == p)
    })
}

type PairCheck = fn(&SdVector, &SdVector, ChannelKind) -> bool;

fn channel_grid(
    name: &'static str,
    ms: &ModuliSet,
    exec: Execution,
    check: PairCheck,
) -> SuiteResult {
    let p = ms.n() as usize;
    let count = 3usize.pow(p as u32);
    let vectors: Vec<SdVector> = SdVector::enumerate(p).collect();
    let mut failures = 0;
    for ch in kinds(ms) {
        failures += exec.sum_range(0..count * count, |k| {
            fails(check(&vectors[k / count], &vectors[k % count], ch))
        });
    }
    SuiteResult {
        name,
        checked: 3 * (count * count) as u64,
        failures,
    }
}

fn channel_random(
    name: &'static str,
    ms: &ModuliSet,
    trials: u64,
    seed: u64,
    exec: Execution,
    check: PairCheck,
) -> SuiteResult {
    let p = ms.n() as usize;
    let tag = 2 + name.len() as u64;
    let mut failures = 0;
    for (i, ch) in kinds(ms).into_iter().enumerate() {
        failures += random_failures(trials, seed, tag * 4 + i as u64, exec, |rng| {
            let (a, b) = (random_sd(rng, p), random_sd(rng, p));
            fails(check(&a, &b, ch))
        });
    }
    SuiteResult {
        name,
        checked: 3 * trials,
        failures,
    }
}

fn rotation_ok(y: &SdVector, a: usize, ch: ChannelKind) -> bool {
    let m = ch.modulus() as i128;
    rotate_mod(y, a, ch)
        .is_ok_and(|r| r.value().rem_euclid(m) == ((1i128 << a) * y.value()).rem_euclid(m))
}

fn rotation_all(ms: &ModuliSet, exec: Execution) -> SuiteResult {
    let p = ms.n() as usize;
    let count = 3usize.pow(p as u32);
    let shifts = p + 1;
    let mut failures = 0;
    for ch in kinds(ms) {
        failures += exec.sum_range(0..count * shifts, |k| {
            fails(rotation_ok(
                &SdVector::from_index(k / shifts, p),
                k % shifts,
                ch,
            ))
        });
    }
    SuiteResult {
        name: "rotation",
        checked: 3 * (count * shifts) as u64,
        failures,
    }
}

fn rotation_random(ms: &ModuliSet, trials: u64, seed: u64, exec: Execution) -> SuiteResult {
    let p = ms.n() as usize;
    let mut failures = 0;
    for (i, ch) in kinds(ms).into_iter().enumerate() {
        failures += random_failures(trials, seed, 40 + i as u64, exec, |rng| {
            let y = random_sd(rng, p);
            fails(rotation_ok(&y, rng.gen_range(0..=p), ch))
        });
    }
    SuiteResult {
        name: "rotation",
        checked: 3 * trials,
        failures,
    }
}

/// Mutating input digit `j < i - 2` of either operand leaves output digit `i`
/// of [`sd_add`] unchanged. Returns the number of violations.
pub fn locality_violations(
    a: &SdVector,
    b: &SdVector,
    i: usize,
    j: usize,
    operand: usize,
    digit: i8,
) -> u64 {
    let before = match sd_add(a, b) {
        Ok(s) => s.digit(i),
        Err(_) => return 1,
    };
    let mut mutated = [a.digits().to_vec(), b.digits().to_vec()];
    mutated[operand][j] = digit;
    let [ma, mb] = mutated.map(|d| SdVector::new(d).expect("valid digits"));
    match sd_add(&ma, &mb) {
        Ok(s) => fails(s.digit(i) == before),
        Err(_) => 1,
    }
}

fn locality_all(width: usize, exec: Execution) -> SuiteResult {
    let count = 3usize.pow(width as u32);
    let per_pair: Vec<(usize, usize)> = (3..=width)
        .flat_map(|i| (0..i - 2).map(move |j| (i, j)))
        .collect();
    // each (i, j) is mutated on both operands to both other digit values
    let checks = per_pair.len() * 4;
    let failures = exec.sum_range(0..count * count, |k| {
        let a = SdVector::from_index(k / count, width);
        let b = SdVector::from_index(k % count, width);
        let mut f = 0;
        for &(i, j) in &per_pair {
            for operand in 0..2 {
                let cur = [&a, &b][operand].digit(j);
                for digit in (-1..=1).filter(|&d| d != cur) {
                    f += locality_violations(&a, &b, i, j, operand, digit);
                }
            }
        }
        // the plain adder must also stay single-pass
        f + sd_add_trace(&a, &b).map_or(1, |t| t.secondary_carries() as u64)
    });
    SuiteResult {
        name: "carry locality",
        checked: (count * count * checks) as u64,
        failures,
    }
}

/// Random carry-locality trials at the given width (at least 4).
pub fn locality_random(width: usize, trials: u64, seed: u64, exec: Execution) -> SuiteResult {
    let failures = random_failures(trials, seed, 60, exec, |rng| {
        let (a, b) = (random_sd(rng, width), random_sd(rng, width));
        let i = rng.gen_range(3..=width);
        let j = rng.gen_range(0..i - 2);
        let operand = rng.gen_range(0..2);
        let cur = [&a, &b][operand].digit(j);
        let digit = loop {
            let d = rng.gen_range(-1i8..=1);
            if d != cur {
                break d;
            }
        };
        locality_violations(&a, &b, i, j, operand, digit)
    });
    SuiteResult {
        name: "carry locality",
        checked: trials,
        failures,
    }
}

fn homomorphism_ok(x: u128, y: u128, ms: &ModuliSet) -> bool {
    let m = ms.range();
    let (Ok(ex), Ok(ey)) = (encode(x, ms), encode(y, ms)) else {
        return false;
    };
    let add = sdrns_add(&ex, &ey).map(|t| decode(&t));
    let mul = sdrns_mul(&ex, &ey).map(|t| decode(&t));
    add.ok() == Some((x + y) % m) && mul.ok() == Some((x * y) % m)
}

/// Every pair for `M <= 1024`; otherwise every `X` against 256 evenly spaced
/// `Y` values.
fn homomorphism_grid(ms: &ModuliSet, exec: Execution) -> SuiteResult {
    let m = ms.range() as usize;
    let ys: Vec<u128> = if m <= 1024 {
        (0..m as u128).collect()
    } else {
        (0..256)
            .map(|k| (k * m / 256) as u128 + 1)
            .map(|y| y.min(m as u128 - 1))
            .collect()
    };
    let failures = exec.sum_range(0..m * ys.len(), |k| {
        fails(homomorphism_ok(
            (k / ys.len()) as u128,
            ys[k % ys.len()],
            ms,
        ))
    });
    SuiteResult {
        name: "homomorphism",
        checked: (m * ys.len()) as u64,
        failures,
    }
}

fn homomorphism_random(ms: &ModuliSet, trials: u64, seed: u64, exec: Execution) -> SuiteResult {
    SuiteResult {
        name: "homomorphism",
        checked: trials,
        failures: random_failures(trials, seed, 80, exec, |rng| {
            let x = rng.gen_range(0..ms.range());
            let y = rng.gen_range(0..ms.range());
            fails(homomorphism_ok(x, y, ms))
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_n3_passes() {
        let r = run(3, VerifyMode::Exhaustive, Execution::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.suite("round-trip").unwrap().checked, 504);
        assert_eq!(r.suite("sd-rns add").unwrap().checked, 3 * 729);
        assert_eq!(r.suite("sd-rns mul").unwrap().checked, 3 * 729);
    }

    #[test]
    fn exhaustive_guard() {
        assert!(matches!(
            run(5, VerifyMode::Exhaustive, Execution::Sequential),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn random_is_mode_independent() {
        let mode = VerifyMode::Random {
            trials: 3000,
            seed: 9,
        };
        let a = run(6, mode, Execution::Sequential).unwrap();
        let b = run(6, mode, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{a}");
        assert_eq!(a.suite("carry locality").unwrap().checked, 3000);
    }

    #[test]
    fn locality_detects_a_dependent_digit() {
        // output digit 1 does depend on input position 0
        let a = SdVector::new(vec![1, 0, 0, 0]).unwrap();
        let b = SdVector::zero(4);
        assert_eq!(locality_violations(&a, &b, 1, 0, 1, -1), 1);
    }
}
