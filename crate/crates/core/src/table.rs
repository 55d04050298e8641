//! Timbre tables: per-order deviation and magnitude surfaces over (RPM, torque).
//!
//! Surfaces are stored cell-major, so the 128 values of one operating point
//! are contiguous and a bilinear lookup touches four contiguous slices.
//!
//! # File format
//!
//! JSON object with `format = "ordersynth-timbre-table"` and `version = 1`:
//! `engine_id`, `orders` (H values), `rpm_axis` (R ascending centres),
//! `torque_axis` (T ascending centres), `deviation` and `magnitude`
//! (R * T * H numbers, index `(r * T + t) * H + h`), and `occupancy`
//! (R * T observation counts; 0 marks a nearest-neighbour filled cell).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::OrderFrameResult;
use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "ordersynth-timbre-table";
pub const FORMAT_VERSION: u32 = 1;

/// Bin centres of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGrid {
    pub rpm_axis: Vec<f64>,
    pub torque_axis: Vec<f64>,
}

impl Default for TableGrid {
    /// 0 to 8000 RPM in 250 RPM steps, -200 to 800 Nm in 50 Nm steps.
    fn default() -> Self {
        Self::uniform((0.0, 8000.0, 250.0), (-200.0, 800.0, 50.0)).expect("default grid is valid")
    }
}

impl TableGrid {
    pub fn new(rpm_axis: Vec<f64>, torque_axis: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("rpm", &rpm_axis), ("torque", &torque_axis)] {
            if axis.is_empty() {
                return Err(Error::parameter(format!("{name} axis is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::parameter(format!("{name} axis must be strictly increasing")));
            }
        }
        Ok(Self { rpm_axis, torque_axis })
    }

    /// Axes from `(min, max, step)` triples, inclusive of `max` when it lies on the step.
    pub fn uniform(rpm: (f64, f64, f64), torque: (f64, f64, f64)) -> Result<Self> {
        let axis = |(lo, hi, step): (f64, f64, f64)| -> Result<Vec<f64>> {
            if !(step > 0.0) || hi < lo {
                return Err(Error::parameter(format!("bad axis spec {lo}..{hi} step {step}")));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| lo + i as f64 * step).collect())
        };
        Self::new(axis(rpm)?, axis(torque)?)
    }

    pub fn num_cells(&self) -> usize {
        self.rpm_axis.len() * self.torque_axis.len()
    }

    /// Cell whose centre is nearest to the operating point (clamped to the grid).
    pub fn cell_of(&self, rpm: f64, torque: f64) -> (usize, usize) {
        (nearest(&self.rpm_axis, rpm), nearest(&self.torque_axis, torque))
    }

    pub fn cell_index(&self, r: usize, t: usize) -> usize {
        r * self.torque_axis.len() + t
    }
}

fn nearest(axis: &[f64], x: f64) -> usize {
    match axis.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i == axis.len() => axis.len() - 1,
        // ties go to the lower cell
        Err(i) => {
            if x - axis[i - 1] <= axis[i] - x {
                i - 1
            } else {
                i
            }
        }
    }
}

/// Segment index and weight of `x` on `axis` for linear interpolation,
/// clamped to the axis ends.
fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64) {
    let n = axis.len();
    if n == 1 || x <= axis[0] {
        return (0, 0, 0.0);
    }
    if x >= axis[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let i = axis.partition_point(|&v| v <= x) - 1;
    (i, i + 1, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimbreTable {
    format: String,
    version: u32,
    pub engine_id: String,
    orders: Vec<f64>,
    rpm_axis: Vec<f64>,
    torque_axis: Vec<f64>,
    deviation: Vec<f64>,
    magnitude: Vec<f64>,
    occupancy: Vec<u32>,
}

impl TimbreTable {
    /// A fully specified table from a function of `(order, rpm, torque)`
    /// returning `(deviation, magnitude)` at each cell centre. Every cell is
    /// marked as observed once.
    pub fn from_fn(
        engine_id: impl Into<String>,
        orders: Vec<f64>,
        grid: &TableGrid,
        mut f: impl FnMut(f64, f64, f64) -> (f64, f64),
    ) -> Result<Self> {
        let h = orders.len();
        let mut deviation = Vec::with_capacity(grid.num_cells() * h);
        let mut magnitude = Vec::with_capacity(grid.num_cells() * h);
        for &r in &grid.rpm_axis {
            for &t in &grid.torque_axis {
                for &o in &orders {
                    let (d, m) = f(o, r, t);
                    deviation.push(d);
                    magnitude.push(m);
                }
            }
        }
        let table = Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            engine_id: engine_id.into(),
            orders,
            rpm_axis: grid.rpm_axis.clone(),
            torque_axis: grid.torque_axis.clone(),
            deviation,
            magnitude,
            occupancy: vec![1; grid.num_cells()],
        };
        table.validate().map_err(|e| Error::parameter(e.to_string()))?;
        Ok(table)
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn num_orders(&self) -> usize {
        self.orders.len()
    }

    pub fn rpm_axis(&self) -> &[f64] {
        &self.rpm_axis
    }

    pub fn torque_axis(&self) -> &[f64] {
        &self.torque_axis
    }

    pub fn grid(&self) -> TableGrid {
        TableGrid { rpm_axis: self.rpm_axis.clone(), torque_axis: self.torque_axis.clone() }
    }

    pub fn occupancy(&self, r: usize, t: usize) -> u32 {
        self.occupancy[r * self.torque_axis.len() + t]
    }

    pub fn is_filled(&self, r: usize, t: usize) -> bool {
        self.occupancy(r, t) == 0
    }

    fn cell_offset(&self, r: usize, t: usize) -> usize {
        (r * self.torque_axis.len() + t) * self.orders.len()
    }

    /// Stored (deviation, magnitude) slices of one cell.
    pub fn cell(&self, r: usize, t: usize) -> (&[f64], &[f64]) {
        let o = self.cell_offset(r, t);
        let h = self.orders.len();
        (&self.deviation[o..o + h], &self.magnitude[o..o + h])
    }

    /// Bilinear lookup into caller buffers of length [`Self::num_orders`].
    /// Out-of-range operating points clamp to the axis bounds.
    pub fn lookup_into(&self, rpm: f64, torque: f64, deviation: &mut [f64], magnitude: &mut [f64]) {
        let (r0, r1, wr) = bracket(&self.rpm_axis, rpm);
        let (t0, t1, wt) = bracket(&self.torque_axis, torque);
        let corners = [
            (self.cell_offset(r0, t0), (1.0 - wr) * (1.0 - wt)),
            (self.cell_offset(r0, t1), (1.0 - wr) * wt),
            (self.cell_offset(r1, t0), wr * (1.0 - wt)),
            (self.cell_offset(r1, t1), wr * wt),
        ];
        let h = self.orders.len();
        let (dev_out, mag_out) = (&mut deviation[..h], &mut magnitude[..h]);
        let (o, w) = corners[0];
        for ((d, m), (&sd, &sm)) in dev_out
            .iter_mut()
            .zip(mag_out.iter_mut())
            .zip(self.deviation[o..o + h].iter().zip(&self.magnitude[o..o + h]))
        {
            *d = w * sd;
            *m = w * sm;
        }
        for &(o, w) in &corners[1..] {
            if w == 0.0 {
                continue;
            }
            for ((d, m), (&sd, &sm)) in dev_out
                .iter_mut()
                .zip(mag_out.iter_mut())
                .zip(self.deviation[o..o + h].iter().zip(&self.magnitude[o..o + h]))
            {
                *d += w * sd;
                *m += w * sm;
            }
        }
    }

    /// Per-order `(deviation, magnitude)` at an operating point.
    pub fn lookup(&self, rpm: f64, torque: f64) -> (Vec<f64>, Vec<f64>) {
        let mut d = vec![0.0; self.orders.len()];
        let mut m = vec![0.0; self.orders.len()];
        self.lookup_into(rpm, torque, &mut d, &mut m);
        (d, m)
    }

    /// A copy with every magnitude outside `keep` set to zero.
    pub fn with_orders_masked(&self, keep: impl Fn(f64) -> bool) -> TimbreTable {
        let mut out = self.clone();
        let h = self.orders.len();
        for (i, m) in out.magnitude.iter_mut().enumerate() {
            if !keep(self.orders[i % h]) {
                *m = 0.0;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT_NAME {
            return Err(Error::format(format!("unknown table format {:?}", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "table version {} is not supported (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        TableGrid::new(self.rpm_axis.clone(), self.torque_axis.clone()).map_err(|e| Error::format(e.to_string()))?;
        if self.orders.is_empty() {
            return Err(Error::format("table has no orders"));
        }
        let cells = self.rpm_axis.len() * self.torque_axis.len();
        let values = cells * self.orders.len();
        if self.deviation.len() != values || self.magnitude.len() != values || self.occupancy.len() != cells {
            return Err(Error::format("surface dimensions do not match the axes"));
        }
        if self.magnitude.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::format("magnitudes must be finite and non-negative"));
        }
        if self.deviation.iter().any(|d| !(d.abs() < 0.5)) {
            return Err(Error::format("deviations must lie strictly within half an order"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: TimbreTable = serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path.as_ref())?)
    }
}

/// Aggregates per-frame order results into a table.
///
/// Each observation lands in the cell nearest its (RPM, torque). Cell values
/// are per-order means over in-band observations. Cells without observations
/// copy the nearest observed cell, measuring distance with each axis scaled
/// to unit span.
pub fn build_table(
    results: &[OrderFrameResult],
    grid: &TableGrid,
    engine_id: impl Into<String>,
) -> Result<TimbreTable> {
    let first = results.first().ok_or_else(|| Error::input("no frame results to build a table from"))?;
    let orders: Vec<f64> = first.orders.iter().map(|o| o.order).collect();
    let h = orders.len();
    if h == 0 {
        return Err(Error::input("frame results carry no orders"));
    }
    let cells = grid.num_cells();
    let mut dev_sum = vec![0.0; cells * h];
    let mut mag_sum = vec![0.0; cells * h];
    let mut in_band = vec![0u32; cells * h];
    let mut occupancy = vec![0u32; cells];

    for (n, res) in results.iter().enumerate() {
        if res.orders.len() != h || res.orders.iter().zip(&orders).any(|(o, &want)| o.order != want) {
            return Err(Error::input(format!("frame result {n} has a different order set")));
        }
        let (r, t) = grid.cell_of(res.rpm_mean, res.torque_mean);
        let c = grid.cell_index(r, t);
        occupancy[c] += 1;
        for (j, est) in res.orders.iter().enumerate().filter(|(_, e)| e.in_band) {
            dev_sum[c * h + j] += est.deviation;
            mag_sum[c * h + j] += est.magnitude;
            in_band[c * h + j] += 1;
        }
    }

    let mut deviation = vec![0.0; cells * h];
    let mut magnitude = vec![0.0; cells * h];
    for i in 0..cells * h {
        if in_band[i] > 0 {
            let n = f64::from(in_band[i]);
            deviation[i] = dev_sum[i] / n;
            magnitude[i] = mag_sum[i] / n;
        }
    }

    let observed: Vec<(usize, usize)> = (0..grid.rpm_axis.len())
        .flat_map(|r| (0..grid.torque_axis.len()).map(move |t| (r, t)))
        .filter(|&(r, t)| occupancy[grid.cell_index(r, t)] > 0)
        .collect();
    let span = |axis: &[f64]| (axis[axis.len() - 1] - axis[0]).max(f64::MIN_POSITIVE);
    let (rs, ts) = (span(&grid.rpm_axis), span(&grid.torque_axis));
    for r in 0..grid.rpm_axis.len() {
        for t in 0..grid.torque_axis.len() {
            let c = grid.cell_index(r, t);
            if occupancy[c] > 0 {
                continue;
            }
            let dist = |&(or, ot): &(usize, usize)| {
                let dr = (grid.rpm_axis[or] - grid.rpm_axis[r]) / rs;
                let dt = (grid.torque_axis[ot] - grid.torque_axis[t]) / ts;
                dr * dr + dt * dt
            };
            // min_by keeps the first minimum: ties resolve to the lowest (rpm, torque) index
            let src = observed
                .iter()
                .min_by(|a, b| dist(a).total_cmp(&dist(b)))
                .map(|&(or, ot)| grid.cell_index(or, ot))
                .expect("at least one observed cell");
            deviation.copy_within(src * h..(src + 1) * h, c * h);
            magnitude.copy_within(src * h..(src + 1) * h, c * h);
        }
    }

    let table = TimbreTable {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        engine_id: engine_id.into(),
        orders,
        rpm_axis: grid.rpm_axis.clone(),
        torque_axis: grid.torque_axis.clone(),
        deviation,
        magnitude,
        occupancy,
    };
    table.validate().map_err(|e| Error::input(e.to_string()))?;
    Ok(table)
}
