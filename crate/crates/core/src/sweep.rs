//! Delay surfaces over a grid of addition and multiplication counts.

use std::io::{self, Write};

use crate::cost::{total_delay, ConversionMode, CostTable, DesignPoint, System, WorkloadCounts};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Inclusive arithmetic progression `start, start + step, ..., <= stop`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisRange {
    start: u64,
    stop: u64,
    step: u64,
}

impl AxisRange {
    pub fn new(start: u64, stop: u64, step: u64) -> Result<Self> {
        if stop < start {
            return Err(Error::Config(format!(
                "range stop {stop} is below start {start}"
            )));
        }
        if step == 0 {
            return Err(Error::Config("range step must be at least 1".into()));
        }
        Ok(AxisRange { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> u64 {
        self.start + i as u64 * self.step
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub x: AxisRange,
    pub y: AxisRange,
    pub point: DesignPoint,
    pub systems: Vec<System>,
    pub mode: ConversionMode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub x: u64,
    pub y: u64,
    pub system: System,
    pub delay_ns: f64,
}

impl SweepGrid {
    /// A grid over every system.
    pub fn new(x: AxisRange, y: AxisRange, point: DesignPoint, mode: ConversionMode) -> Self {
        SweepGrid {
            x,
            y,
            point,
            systems: System::ALL.to_vec(),
            mode,
        }
    }

    /// Rows ordered by x, then y, then system order.
    pub fn evaluate(&self, table: &CostTable, exec: Execution) -> Result<Vec<SweepRow>> {
        let mut systems = self.systems.clone();
        systems.sort();
        systems.dedup();
        let costs = systems
            .iter()
            .map(|&s| table.costs(self.point, s).map(|c| (s, *c)))
            .collect::<Result<Vec<_>>>()?;

        let ny = self.y.len();
        let cells = exec.map_range(0..self.x.len() * ny, |k| {
            let (x, y) = (self.x.get(k / ny), self.y.get(k % ny));
            let w = WorkloadCounts::new(x, y);
            costs
                .iter()
                .map(|(s, c)| {
                    total_delay(w, *s, c, self.mode).map(|e| SweepRow {
                        x,
                        y,
                        system: *s,
                        delay_ns: e.total_ns,
                    })
                })
                .collect::<Result<Vec<_>>>()
        });
        let mut rows = Vec::with_capacity(cells.len() * costs.len());
        for cell in cells {
            rows.extend(cell?);
        }
        Ok(rows)
    }
}

pub const CSV_HEADER: &str = "x,y,system,delay_ns";

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.6}", r.x, r.y, r.system.key(), r.delay_ns)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(stop: u64) -> SweepGrid {
        SweepGrid::new(
            AxisRange::new(0, stop, 1).unwrap(),
            AxisRange::new(0, stop, 1).unwrap(),
            DesignPoint::new(16, 5),
            ConversionMode::Zero,
        )
    }

    #[test]
    fn cardinality_and_order() {
        let rows = grid(1)
            .evaluate(&CostTable::reference(), Execution::Sequential)
            .unwrap();
        assert_eq!(rows.len(), 16);
        assert_eq!(
            (rows[0].x, rows[0].y, rows[0].system),
            (0, 0, System::SdRns)
        );
        assert_eq!((rows[4].x, rows[4].y), (0, 1));
        assert_eq!(
            (rows[15].x, rows[15].y, rows[15].system),
            (1, 1, System::Bns)
        );
    }

    #[test]
    fn modes_produce_identical_csv() {
        let t = CostTable::reference();
        let g = grid(30);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&g.evaluate(&t, Execution::Sequential).unwrap(), &mut a).unwrap();
        write_csv(&g.evaluate(&t, Execution::Parallel).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a)
            .unwrap()
            .starts_with("x,y,system,delay_ns\n0,0,sd-rns,0.000000\n"));
    }

    #[test]
    fn system_filter_and_ranges() {
        let mut g = grid(2);
        g.systems = vec![System::Bns, System::SdRns, System::Bns];
        let rows = g
            .evaluate(&CostTable::reference(), Execution::default())
            .unwrap();
        assert_eq!(rows.len(), 18);
        assert_eq!(rows[0].system, System::SdRns);
        assert!(AxisRange::new(5, 4, 1).is_err());
        assert!(AxisRange::new(0, 4, 0).is_err());
        assert_eq!(AxisRange::new(0, 10, 3).unwrap().len(), 4);
    }
}
