//! Annealing schedules `s(t/T)`: the truncated sine-series path state and
//! its action set, plus the linear and local-adiabatic (Roland–Cerf)
//! baselines.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::GroverVariant;

/// Anything that can be evaluated as `s(x)` for `x = t/T ∈ [0, 1]`.
pub trait Schedule {
    fn value(&self, x: f64) -> f64;

    /// Values on `points` uniformly spaced nodes covering `[0, 1]`.
    fn tabulate(&self, points: usize) -> Vec<f64> {
        let last = (points.max(2) - 1) as f64;
        (0..points).map(|k| self.value(k as f64 / last)).collect()
    }
}

impl<F: Fn(f64) -> f64> Schedule for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Fourier coefficients `b` of `s(x) = x + Σ_m b_m sin(mπx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathState {
    coefficients: Vec<f64>,
}

impl PathState {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::param("path state needs at least one coefficient"));
        }
        if coefficients.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("path coefficients must be finite"));
        }
        Ok(Self { coefficients })
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self { coefficients: vec![0.0; cutoff.max(1)] }
    }

    pub fn cutoff(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn action_count(&self) -> usize {
        ActionId::count(self.cutoff())
    }

    /// `s(x)`; `x` must lie in `[0, 1]`. No clamping of the result.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::param(format!("schedule argument {x} outside [0, 1]")));
        }
        Ok(self.value(x))
    }

    /// Applies an action with the given update size.
    pub fn apply(&self, action: ActionId, magnitude: f64) -> Result<PathState> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::param(format!("update magnitude {magnitude} must be finite and non-negative")));
        }
        let mut next = self.clone();
        if let Some((m, sign)) = action.target(self.cutoff())? {
            next.coefficients[m] += sign * magnitude;
        }
        Ok(next)
    }

    /// Accumulates `Σ_m b_m sin(mπx)` with the sine recurrence. Points past
    /// the midpoint are reflected so both endpoints evaluate to exact zeros.
    fn sine_sum(&self, x: f64) -> f64 {
        let (y, parity) = if x > 0.5 { (1.0 - x, true) } else { (x, false) };
        let (sin1, cos1) = (PI * y).sin_cos();
        let two_cos = 2.0 * cos1;
        let (mut prev, mut cur) = (0.0, sin1);
        let mut sum = 0.0;
        for (k, b) in self.coefficients.iter().enumerate() {
            // sin(mπx) = (−1)^{m+1} sin(mπ(1−x)) for m = k + 1
            let sign = if parity && k % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * b * cur;
            let next = two_cos * cur - prev;
            prev = cur;
            cur = next;
        }
        sum
    }
}

impl Schedule for PathState {
    fn value(&self, x: f64) -> f64 {
        x + self.sine_sum(x)
    }
}

impl fmt::Display for PathState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.coefficients.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b:+.4}")?;
        }
        write!(f, "]")
    }
}

/// Index into the `2C + 1` path actions. 0 is the identity; `2m − 1` and
/// `2m` decrement and increment `b_m` (1-based `m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ActionId {
    pub const IDENTITY: ActionId = ActionId(0);

    pub fn count(cutoff: usize) -> usize {
        2 * cutoff + 1
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// Zero-based coefficient index and sign, or `None` for the identity.
    pub fn target(self, cutoff: usize) -> Result<Option<(usize, f64)>> {
        if self.0 >= Self::count(cutoff) {
            return Err(Error::param(format!("action {} out of range for cutoff {cutoff}", self.0)));
        }
        if self.0 == 0 {
            return Ok(None);
        }
        let m = (self.0 + 1) / 2 - 1;
        let sign = if self.0 % 2 == 1 { -1.0 } else { 1.0 };
        Ok(Some((m, sign)))
    }
}

/// `b = 0`, i.e. `s(x) = x`.
pub fn linear_schedule(cutoff: usize) -> PathState {
    PathState::zeros(cutoff)
}

/// Grid size used by [`RolandCerfSchedule::new`] callers by default.
pub const ROLAND_CERF_SAMPLES: usize = 10_001;

/// Local-adiabatic easy-Grover schedule, `ds/dx ∝ g²(s)` with
/// `g²(s) = 1 − 4(1 − 1/N) s(1 − s)`, tabulated on a uniform grid and
/// evaluated with monotone cubic (Fritsch–Carlson) interpolation.
#[derive(Debug, Clone)]
pub struct RolandCerfSchedule {
    n_qubits: usize,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl RolandCerfSchedule {
    pub fn new(n_qubits: usize, samples: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 60 {
            return Err(Error::param(format!("qubit count {n_qubits} outside 1..=60")));
        }
        if samples < 100 {
            return Err(Error::param(format!("need at least 100 samples, got {samples}")));
        }
        let h = 1.0 / (samples - 1) as f64;
        let mut values: Vec<f64> = (0..samples).map(|k| roland_cerf_closed_form(n_qubits, k as f64 * h)).collect();
        values[0] = 0.0;
        values[samples - 1] = 1.0;
        let slopes = pchip_slopes(&values, h);
        Ok(Self { n_qubits, values, slopes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn samples(&self) -> usize {
        self.values.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.values
    }

    /// Interpolated `ds/dx`.
    pub fn slope(&self, x: f64) -> f64 {
        let (k, t, h) = self.locate(x);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * y0 + dh01 * y1) / h + dh10 * m0 + dh11 * m1
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let intervals = self.values.len() - 1;
        let h = 1.0 / intervals as f64;
        let pos = x.clamp(0.0, 1.0) * intervals as f64;
        let k = (pos.floor() as usize).min(intervals - 1);
        (k, pos - k as f64, h)
    }
}

impl Schedule for RolandCerfSchedule {
    fn value(&self, x: f64) -> f64 {
        let (k, t, h) = self.locate(x);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
    }
}

/// Closed-form integral of `ds/dx ∝ g²(s)` with `s(0) = 0`, `s(1) = 1`:
/// `s(x) = 1/2 + tan((2x − 1)·atan√(N−1)) / (2√(N−1))`.
pub fn roland_cerf_closed_form(n_qubits: usize, x: f64) -> f64 {
    let n_states = (n_qubits as f64 * std::f64::consts::LN_2).exp();
    let r = (n_states - 1.0).sqrt();
    0.5 + ((2.0 * x - 1.0) * r.atan()).tan() / (2.0 * r)
}

fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (d[k - 1], d[k]);
        m[k] = if a * b <= 0.0 { 0.0 } else { 2.0 / (1.0 / a + 1.0 / b) };
    }
    let end = |d0: f64, d1: f64| {
        let m = (3.0 * d0 - d1) / 2.0;
        if m.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            m
        }
    };
    m[0] = end(d[0], d[1]);
    m[n - 1] = end(d[n - 2], d[n - 3]);
    m
}

/// Which problem family a schedule record was produced for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Grover,
    Sat3,
}

pub const SCHEDULE_FORMAT_VERSION: u32 = 1;

/// Portable JSON record of a trained (or baseline) schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRecord {
    pub format_version: u32,
    pub problem: ProblemKind,
    /// Driver variant for Grover, absent for 3-SAT.
    pub variant: Option<GroverVariant>,
    /// Qubit count (Grover) or bit count `N_b` (3-SAT).
    pub n: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(rename = "C")]
    pub cutoff: usize,
    pub b: Vec<f64>,
}

impl ScheduleRecord {
    pub fn new(path: &PathState, problem: ProblemKind, variant: Option<GroverVariant>, n: usize, total_time: f64) -> Self {
        Self {
            format_version: SCHEDULE_FORMAT_VERSION,
            problem,
            variant,
            n,
            total_time,
            cutoff: path.cutoff(),
            b: path.coefficients().to_vec(),
        }
    }

    pub fn path(&self) -> Result<PathState> {
        PathState::new(self.b.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ScheduleRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if record.format_version != SCHEDULE_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", record.format_version)));
        }
        if record.cutoff != record.b.len() {
            return Err(Error::Parse(format!("C = {} but b has {} entries", record.cutoff, record.b.len())));
        }
        if !(record.total_time.is_finite() && record.total_time > 0.0) {
            return Err(Error::Parse(format!("T must be positive, got {}", record.total_time)));
        }
        Ok(record)
    }

    /// Same coefficients at a new size with `T ∝ √(2^n)`.
    pub fn rescaled_to(&self, n: usize) -> Self {
        let factor = ((n as f64 - self.n as f64) * 0.5 * std::f64::consts::LN_2).exp();
        Self { n, total_time: self.total_time * factor, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        assert_eq!(PathState::zeros(6).evaluate(0.5).unwrap(), 0.5);
        let p = PathState::new(vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((p.evaluate(0.5).unwrap() - 0.6).abs() < 1e-15);
        assert!(p.evaluate(-0.01).is_err());
        assert!(p.evaluate(1.01).is_err());
        assert_eq!(linear_schedule(6).evaluate(0.25).unwrap(), 0.25);
        assert_eq!(linear_schedule(6).evaluate(1.0).unwrap(), 1.0);
    }

    #[test]
    fn sine_sum_matches_direct_formula() {
        let p = PathState::new(vec![0.3, -0.2, 0.15, 0.05, -0.4, 0.7, 0.01, -0.09]).unwrap();
        for k in 0..=200 {
            let x = k as f64 / 200.0;
            let direct: f64 =
                x + p.coefficients().iter().enumerate().map(|(m, b)| b * ((m + 1) as f64 * PI * x).sin()).sum::<f64>();
            assert!((p.value(x) - direct).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn tabulate_matches_pointwise() {
        let p = PathState::new(vec![0.1, -0.05, 0.2]).unwrap();
        let table = p.tabulate(11);
        for (k, v) in table.iter().enumerate() {
            assert_eq!(*v, p.value(k as f64 / 10.0));
        }
    }

    #[test]
    fn action_semantics() {
        let zero = PathState::zeros(6);
        assert_eq!(zero.apply(ActionId::IDENTITY, 0.1).unwrap(), zero);
        let up = zero.apply(ActionId(2), 0.1).unwrap();
        assert_eq!(up.coefficients()[0], 0.1);
        let down = zero.apply(ActionId(11), 0.05).unwrap();
        assert_eq!(down.coefficients()[5], -0.05);
        assert!(zero.apply(ActionId(13), 0.1).is_err());
        assert!(zero.apply(ActionId(1), -0.1).is_err());
        assert_eq!(zero.action_count(), 13);
    }

    #[test]
    fn roland_cerf_matches_closed_form_at_two_states() {
        let rc = RolandCerfSchedule::new(1, ROLAND_CERF_SAMPLES).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=9973 {
            let x = k as f64 / 9973.0;
            worst = worst.max((rc.value(x) - roland_cerf_closed_form(1, x)).abs());
        }
        assert!(worst < 1e-8, "worst {worst}");
        assert!(RolandCerfSchedule::new(1, 99).is_err());
    }

    #[test]
    fn roland_cerf_solves_its_ode() {
        // Independent route: RK4 on ds/dx = κ g²(s) with κ = ∫ds/g² (Simpson).
        for n in [1usize, 4, 10] {
            let inv_n = 1.0 / (1u64 << n) as f64;
            let g2 = |s: f64| 1.0 - 4.0 * (1.0 - inv_n) * s * (1.0 - s);
            let m = 200_000;
            let h = 1.0 / m as f64;
            let integral: f64 = (0..=m)
                .map(|k| {
                    let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                    w / g2(k as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0;
            let kappa = integral;
            let rc = RolandCerfSchedule::new(n, ROLAND_CERF_SAMPLES).unwrap();
            let steps = 20_000;
            let dx = 1.0 / steps as f64;
            let mut s: f64 = 0.0;
            for i in 0..steps {
                let f = |s: f64| kappa * g2(s);
                let k1 = f(s);
                let k2 = f(s + 0.5 * dx * k1);
                let k3 = f(s + 0.5 * dx * k2);
                let k4 = f(s + dx * k3);
                s += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (i + 1) % 2000 == 0 {
                    let x = (i + 1) as f64 * dx;
                    assert!((rc.value(x) - s).abs() < 1e-6, "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn roland_cerf_shape() {
        let mut prev_mid_slope = f64::INFINITY;
        for n in 1..=12 {
            let rc = RolandCerfSchedule::new(n, ROLAND_CERF_SAMPLES).unwrap();
            assert_eq!(rc.value(0.0), 0.0);
            assert!((rc.value(1.0) - 1.0).abs() < 1e-15);
            assert!((rc.value(0.5) - 0.5).abs() < 1e-12);
            assert!(rc.nodes().windows(2).all(|w| w[1] > w[0]));
            let mid = rc.slope(0.5);
            assert!(mid < prev_mid_slope);
            prev_mid_slope = mid;
        }
    }

    #[test]
    fn record_round_trip() {
        let p = PathState::new(vec![0.1, -0.05, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let rec = ScheduleRecord::new(&p, ProblemKind::Grover, Some(GroverVariant::Easy), 4, 62.2);
        let back = ScheduleRecord::from_json(&rec.to_json().unwrap()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.path().unwrap(), p);
    }

    #[test]
    fn record_missing_field_is_named() {
        let text = r#"{"format_version":1,"problem":"grover","variant":"easy","n":4,"C":1,"b":[0.0]}"#;
        match ScheduleRecord::from_json(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("`T`") && msg.contains("line 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_c = r#"{"format_version":1,"problem":"sat3","variant":null,"n":10,"T":6.0,"C":2,"b":[0.0]}"#;
        assert!(ScheduleRecord::from_json(bad_c).is_err());
    }

    #[test]
    fn rescaling_keeps_coefficients() {
        let p = PathState::new(vec![0.02, 0.11, -0.03]).unwrap();
        let rec = ScheduleRecord::new(&p, ProblemKind::Grover, Some(GroverVariant::Easy), 10, 497.8);
        let big = rec.rescaled_to(12);
        assert_eq!(big.b, rec.b);
        assert!((big.total_time - 995.6).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn endpoints_pinned(b in proptest::collection::vec(-5.0f64..5.0, 1..16)) {
                let p = PathState::new(b).unwrap();
                prop_assert!(p.evaluate(0.0).unwrap().abs() < 1e-15);
                prop_assert!((p.evaluate(1.0).unwrap() - 1.0).abs() < 1e-15);
            }

            #[test]
            fn opposite_actions_cancel(
                b in proptest::collection::vec(-1.0f64..1.0, 6),
                m in 1usize..=6,
                delta in 0.0f64..0.1,
            ) {
                let p = PathState::new(b).unwrap();
                let q = p.apply(ActionId(2 * m - 1), delta).unwrap().apply(ActionId(2 * m), delta).unwrap();
                for (x, y) in p.coefficients().iter().zip(q.coefficients()) {
                    prop_assert!((x - y).abs() < 1e-15);
                }
            }

            #[test]
            fn coefficients_are_signed_sums_of_magnitudes(
                moves in proptest::collection::vec((0usize..13, 0.0f64..0.1), 0..40),
            ) {
                let mut p = PathState::zeros(6);
                let mut expected = [0.0f64; 6];
                for &(a, d) in &moves {
                    p = p.apply(ActionId(a), d).unwrap();
                    if a > 0 {
                        let m = (a + 1) / 2 - 1;
                        expected[m] += if a % 2 == 1 { -d } else { d };
                    }
                }
                for (x, y) in p.coefficients().iter().zip(expected) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
