//! Delay and energy model for the four number systems.
//!
//! A workload of `x` additions and `y` multiplications costs
//! `T_FC + x T_Add + y T_Mul + T_RC` on a given system. Per-operation delays
//! come from a [`CostTable`] keyed by precision and channel size; the built-in
//! table holds reference synthesis delays and no conversion or energy figures.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeral::{MAX_CHANNEL_SIZE, MIN_CHANNEL_SIZE};

pub const SCHEMA_VERSION: u32 = 1;

/// The built-in table as a cost-table file.
pub const REFERENCE_TABLE_JSON: &str = include_str!("../data/reference_delays.json");

/// Number systems, declared in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum System {
    #[serde(rename = "sd-rns")]
    SdRns,
    #[serde(rename = "rns")]
    Rns,
    #[serde(rename = "sd")]
    Sd,
    #[serde(rename = "bns")]
    Bns,
}

impl System {
    pub const ALL: [System; 4] = [System::SdRns, System::Rns, System::Sd, System::Bns];

    /// Residue systems need forward and reverse conversion around the work.
    pub fn is_residue(self) -> bool {
        matches!(self, System::SdRns | System::Rns)
    }

    pub fn key(self) -> &'static str {
        match self {
            System::SdRns => "sd-rns",
            System::Rns => "rns",
            System::Sd => "sd",
            System::Bns => "bns",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::SdRns => "SD-RNS",
            System::Rns => "RNS",
            System::Sd => "SD",
            System::Bns => "BNS",
        })
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sd-rns" | "sdrns" | "r-rns" => Ok(System::SdRns),
            "rns" => Ok(System::Rns),
            "sd" | "redundant" => Ok(System::Sd),
            "bns" | "binary" => Ok(System::Bns),
            _ => Err(Error::NotFound {
                kind: "system",
                name: s.to_string(),
                available: System::ALL.iter().map(|s| s.key().to_string()).collect(),
            }),
        }
    }
}

/// Additions and multiplications in a workload.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WorkloadCounts {
    pub x: u64,
    pub y: u64,
}

impl WorkloadCounts {
    pub fn new(x: u64, y: u64) -> Self {
        WorkloadCounts { x, y }
    }
}

impl std::ops::Add for WorkloadCounts {
    type Output = WorkloadCounts;

    fn add(self, rhs: Self) -> Self {
        WorkloadCounts {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

impl std::iter::Sum for WorkloadCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(WorkloadCounts::default(), |a, b| a + b)
    }
}

/// Precision `P` in bits and channel size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DesignPoint {
    pub precision: u32,
    pub n: u32,
}

impl DesignPoint {
    pub const fn new(precision: u32, n: u32) -> Self {
        DesignPoint { precision, n }
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(P={}, n={})", self.precision, self.n)
    }
}

/// The four reference design points.
pub const REFERENCE_POINTS: [DesignPoint; 4] = [
    DesignPoint::new(16, 5),
    DesignPoint::new(24, 8),
    DesignPoint::new(32, 11),
    DesignPoint::new(64, 21),
];

// (system, add delays, mul delays) in ns at each of REFERENCE_POINTS
const REFERENCE_DELAYS: [(System, [f64; 4], [f64; 4]); 4] = [
    (
        System::SdRns,
        [0.21, 0.21, 0.21, 0.21],
        [0.43, 0.63, 0.74, 0.97],
    ),
    (
        System::Rns,
        [0.28, 0.37, 0.42, 0.58],
        [0.5, 0.72, 0.84, 1.28],
    ),
    (
        System::Sd,
        [0.21, 0.21, 0.21, 0.21],
        [0.8, 0.98, 1.03, 1.24],
    ),
    (System::Bns, [0.3, 0.38, 0.45, 0.63], [1.05, 1.28, 1.5, 1.9]),
];

/// Per-operation costs of one system at one design point. Absent conversion
/// delays count as zero; absent energies make energy queries fail.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OpCosts {
    pub add_delay: Option<f64>,
    pub mul_delay: Option<f64>,
    pub fc_delay: Option<f64>,
    pub rc_delay: Option<f64>,
    pub add_energy: Option<f64>,
    pub mul_energy: Option<f64>,
    pub fc_energy: Option<f64>,
    pub rc_energy: Option<f64>,
}

impl OpCosts {
    pub fn delays(add: f64, mul: f64) -> Self {
        OpCosts {
            add_delay: Some(add),
            mul_delay: Some(mul),
            ..OpCosts::default()
        }
    }

    fn fields(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("add_delay", self.add_delay),
            ("mul_delay", self.mul_delay),
            ("fc_delay", self.fc_delay),
            ("rc_delay", self.rc_delay),
            ("add_energy", self.add_energy),
            ("mul_energy", self.mul_energy),
            ("fc_energy", self.fc_energy),
            ("rc_energy", self.rc_energy),
        ]
    }

    fn has_energy(&self) -> bool {
        self.fields()[4..].iter().any(|(_, v)| v.is_some())
    }

    /// Every field multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: Option<f64>| v.map(|v| v * factor);
        OpCosts {
            add_delay: s(self.add_delay),
            mul_delay: s(self.mul_delay),
            fc_delay: s(self.fc_delay),
            rc_delay: s(self.rc_delay),
            add_energy: s(self.add_energy),
            mul_energy: s(self.mul_energy),
            fc_energy: s(self.fc_energy),
            rc_energy: s(self.rc_energy),
        }
    }
}

/// Whether conversion delays enter the estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConversionMode {
    /// Drop `T_FC` and `T_RC` entirely.
    Zero,
    /// Use the table's conversion delays, counting absent ones as zero.
    #[default]
    FromTable,
}

impl FromStr for ConversionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ConversionMode::Zero),
            "table" | "from-table" => Ok(ConversionMode::FromTable),
            _ => Err(Error::Config(format!(
                "unknown conversion mode `{s}` (expected zero or from-table)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayEstimate {
    pub system: System,
    pub total_ns: f64,
    /// Set when a residue system's conversion delay was missing and taken as 0.
    pub conversion_defaulted: bool,
}

/// `T_FC + x T_Add + y T_Mul + T_RC` for one system.
pub fn total_delay(
    w: WorkloadCounts,
    system: System,
    costs: &OpCosts,
    mode: ConversionMode,
) -> Result<DelayEstimate> {
    let require = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::Config(format!("{system}: missing cost field `{name}`")))
    };
    let add = require("add_delay", costs.add_delay)?;
    let mul = require("mul_delay", costs.mul_delay)?;
    let (conversion, conversion_defaulted) = match mode {
        ConversionMode::Zero => (0.0, false),
        ConversionMode::FromTable => {
            let missing = costs.fc_delay.is_none() || costs.rc_delay.is_none();
            (
                costs.fc_delay.unwrap_or(0.0) + costs.rc_delay.unwrap_or(0.0),
                missing && system.is_residue(),
            )
        }
    };
    Ok(DelayEstimate {
        system,
        total_ns: conversion + w.x as f64 * add + w.y as f64 * mul,
        conversion_defaulted,
    })
}

/// `E_FC + x E_Add + y E_Mul + E_RC`. Fails unless all four energies are set.
pub fn total_energy(w: WorkloadCounts, system: System, costs: &OpCosts) -> Result<f64> {
    let require = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::UnsupportedQuery(format!("{system}: no `{name}` in the cost table")))
    };
    let add = require("add_energy", costs.add_energy)?;
    let mul = require("mul_energy", costs.mul_energy)?;
    let fc = require("fc_energy", costs.fc_energy)?;
    let rc = require("rc_energy", costs.rc_energy)?;
    Ok(fc + w.x as f64 * add + w.y as f64 * mul + rc)
}

/// Per-system costs keyed by design point.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    energy_unit: Option<String>,
    entries: BTreeMap<DesignPoint, BTreeMap<System, OpCosts>>,
}

impl CostTable {
    pub fn new(energy_unit: Option<String>) -> Self {
        CostTable {
            energy_unit,
            entries: BTreeMap::new(),
        }
    }

    /// Synthesis delays at the four reference design points. No conversion or
    /// energy figures are included.
    pub fn reference() -> Self {
        let mut t = CostTable::new(None);
        for (k, pt) in REFERENCE_POINTS.iter().enumerate() {
            for (system, add, mul) in REFERENCE_DELAYS {
                t.entries
                    .entry(*pt)
                    .or_default()
                    .insert(system, OpCosts::delays(add[k], mul[k]));
            }
        }
        t
    }

    pub fn energy_unit(&self) -> Option<&str> {
        self.energy_unit.as_deref()
    }

    pub fn insert(&mut self, pt: DesignPoint, system: System, costs: OpCosts) -> Result<()> {
        validate_costs(pt, system, &costs)?;
        if costs.has_energy() && self.energy_unit.is_none() {
            return Err(Error::Config(format!(
                "{system} at {pt}: energy given but no energy unit declared"
            )));
        }
        self.entries.entry(pt).or_default().insert(system, costs);
        Ok(())
    }

    pub fn points(&self) -> impl Iterator<Item = DesignPoint> + '_ {
        self.entries.keys().copied()
    }

    pub fn point(&self, pt: DesignPoint) -> Result<&BTreeMap<System, OpCosts>> {
        self.entries.get(&pt).ok_or_else(|| {
            let known: Vec<_> = self.points().map(|p| p.to_string()).collect();
            Error::Config(format!(
                "no cost entries for {pt}; table has {}",
                known.join(", ")
            ))
        })
    }

    pub fn costs(&self, pt: DesignPoint, system: System) -> Result<&OpCosts> {
        self.point(pt)?
            .get(&system)
            .ok_or_else(|| Error::Config(format!("no {system} entry at {pt}")))
    }

    /// Every cost multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(pt, row)| {
                (
                    *pt,
                    row.iter().map(|(s, c)| (*s, c.scaled(factor))).collect(),
                )
            })
            .collect();
        CostTable {
            energy_unit: self.energy_unit.clone(),
            entries,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CostTableFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("cost table: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported cost table schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if file.units.delay != "ns" {
            return Err(Error::Config(format!(
                "delay unit must be \"ns\", got {:?}",
                file.units.delay
            )));
        }
        let mut table = CostTable::new(file.units.energy);
        for (idx, e) in file.entries.into_iter().enumerate() {
            let pt = DesignPoint::new(e.precision, e.n);
            if table
                .entries
                .get(&pt)
                .is_some_and(|row| row.contains_key(&e.system))
            {
                return Err(Error::Config(format!(
                    "entries[{idx}]: duplicate {} entry at {pt}",
                    e.system
                )));
            }
            table
                .insert(pt, e.system, e.costs())
                .map_err(|err| Error::Config(format!("entries[{idx}]: {err}")))?;
        }
        Ok(table)
    }

    /// Pretty JSON with a trailing newline, entries ordered by design point
    /// then system.
    pub fn to_json(&self) -> String {
        let entries = self
            .entries
            .iter()
            .flat_map(|(pt, row)| row.iter().map(|(s, c)| EntryFile::new(*pt, *s, c)))
            .collect();
        let file = CostTableFile {
            schema_version: SCHEMA_VERSION,
            units: UnitsFile {
                delay: "ns".into(),
                energy: self.energy_unit.clone(),
            },
            entries,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("cost table serializes");
        s.push('\n');
        s
    }
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable::reference()
    }
}

fn validate_costs(pt: DesignPoint, system: System, costs: &OpCosts) -> Result<()> {
    if pt.precision == 0 {
        return Err(Error::Config("precision P must be positive".into()));
    }
    if !(MIN_CHANNEL_SIZE..=MAX_CHANNEL_SIZE).contains(&pt.n) {
        return Err(Error::Config(format!(
            "channel size n = {} outside [{MIN_CHANNEL_SIZE}, {MAX_CHANNEL_SIZE}]",
            pt.n
        )));
    }
    for (name, v) in costs.fields() {
        if let Some(v) = v {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{system} at {pt}: `{name}` = {v} must be finite and nonnegative"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostTableFile {
    schema_version: u32,
    units: UnitsFile,
    entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsFile {
    delay: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    #[serde(rename = "P")]
    precision: u32,
    n: u32,
    system: System,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    add_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mul_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fc_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rc_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    add_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mul_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fc_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rc_energy: Option<f64>,
}

impl EntryFile {
    fn new(pt: DesignPoint, system: System, c: &OpCosts) -> Self {
        EntryFile {
            precision: pt.precision,
            n: pt.n,
            system,
            add_delay: c.add_delay,
            mul_delay: c.mul_delay,
            fc_delay: c.fc_delay,
            rc_delay: c.rc_delay,
            add_energy: c.add_energy,
            mul_energy: c.mul_energy,
            fc_energy: c.fc_energy,
            rc_energy: c.rc_energy,
        }
    }

    fn costs(&self) -> OpCosts {
        OpCosts {
            add_delay: self.add_delay,
            mul_delay: self.mul_delay,
            fc_delay: self.fc_delay,
            rc_delay: self.rc_delay,
            add_energy: self.add_energy,
            mul_energy: self.mul_energy,
            fc_energy: self.fc_energy,
            rc_energy: self.rc_energy,
        }
    }
}

/// Orders two estimates: lower delay first. Equal delays put systems without
/// conversion stages ahead of residue systems, then follow [`System`] order.
pub fn rank_order(a: &DelayEstimate, b: &DelayEstimate) -> std::cmp::Ordering {
    a.total_ns
        .total_cmp(&b.total_ns)
        .then(a.system.is_residue().cmp(&b.system.is_residue()))
        .then(a.system.cmp(&b.system))
}

/// Every system present at `pt`, fastest first (see [`rank_order`]).
pub fn compare_systems(
    w: WorkloadCounts,
    pt: DesignPoint,
    table: &CostTable,
    mode: ConversionMode,
) -> Result<Vec<DelayEstimate>> {
    let mut out = table
        .point(pt)?
        .iter()
        .map(|(s, c)| total_delay(w, *s, c, mode))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(rank_order);
    Ok(out)
}

/// `delay(baseline) / delay(target)` for workload `w` at `pt`.
pub fn speedup(
    w: WorkloadCounts,
    pt: DesignPoint,
    table: &CostTable,
    mode: ConversionMode,
    baseline: System,
    target: System,
) -> Result<f64> {
    let base = total_delay(w, baseline, table.costs(pt, baseline)?, mode)?;
    let tgt = total_delay(w, target, table.costs(pt, target)?, mode)?;
    if tgt.total_ns == 0.0 {
        return Err(Error::UnsupportedQuery(format!(
            "{target} delay is zero; speedup undefined"
        )));
    }
    Ok(base.total_ns / tgt.total_ns)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MagnitudeClass {
    Zero,
    Low,
    Medium,
    High,
}

impl MagnitudeClass {
    pub const ALL: [MagnitudeClass; 4] = [
        MagnitudeClass::Zero,
        MagnitudeClass::Low,
        MagnitudeClass::Medium,
        MagnitudeClass::High,
    ];
}

impl fmt::Display for MagnitudeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Upper bounds of the Low and Medium classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    low_max: u64,
    med_max: u64,
}

impl Thresholds {
    pub fn new(low_max: u64, med_max: u64) -> Result<Self> {
        if low_max >= med_max {
            return Err(Error::Config(format!(
                "thresholds need low_max < med_max, got {low_max} and {med_max}"
            )));
        }
        Ok(Thresholds { low_max, med_max })
    }

    pub fn low_max(&self) -> u64 {
        self.low_max
    }

    pub fn med_max(&self) -> u64 {
        self.med_max
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            low_max: 10,
            med_max: 100,
        }
    }
}

pub fn classify(count: u64, t: Thresholds) -> MagnitudeClass {
    match count {
        0 => MagnitudeClass::Zero,
        c if c <= t.low_max => MagnitudeClass::Low,
        c if c <= t.med_max => MagnitudeClass::Medium,
        _ => MagnitudeClass::High,
    }
}

const SD: &[System] = &[System::Sd];
const SDRNS: &[System] = &[System::SdRns];
const BOTH: &[System] = &[System::SdRns, System::Rns];

// rows: additions Zero..High; columns: multiplications Zero..High
const SELECTION: [[&[System]; 4]; 4] = [
    [&[], BOTH, BOTH, SDRNS],
    [SD, BOTH, BOTH, SDRNS],
    [SD, SDRNS, BOTH, SDRNS],
    [SD, SDRNS, SDRNS, SDRNS],
];

/// Recommended systems for a workload's addition and multiplication classes.
/// Empty when the workload has neither.
pub fn select_system(adds: MagnitudeClass, muls: MagnitudeClass) -> &'static [System] {
    SELECTION[adds as usize][muls as usize]
}
