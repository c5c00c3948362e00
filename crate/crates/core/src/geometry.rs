//! Site geometries, the critical distance of a set of supports, and the
//! multipartite Lieb-Robinson envelope `(n^n/4)·c2·exp(v t − R)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correlators::u2;
use crate::error::{invalid, Error, Result};
use crate::partitions::{enumerate_bipartitions, Bipartition};
use crate::quantum::{Hamiltonian, Observable, Pauli, Propagator, StateVector};

/// Slack allowed when validating the triangle inequality.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Largest number of supports scanned by [`critical_distance`].
pub const MAX_SUPPORTS: usize = 20;

/// Correlators below this magnitude carry no usable signal for calibration.
pub const CALIBRATION_FLOOR: f64 = 1e-14;

/// Velocity used when the fitted slope is not positive.
pub const MIN_VELOCITY: f64 = 1e-6;

/// Log-space round-off tolerated by [`check_bound`]; calibration samples sit
/// exactly on the fitted envelope.
pub const LOG_SLACK_TOLERANCE: f64 = 1e-12;

/// Pairwise site distances, optionally backed by coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    positions: Option<Vec<Vec<f64>>>,
    distances: Vec<Vec<f64>>,
    allow_nonmetric: bool,
}

#[derive(Deserialize, Serialize)]
struct GeometryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distances: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    allow_nonmetric: bool,
}

impl Geometry {
    /// Euclidean distances between the given coordinates.
    pub fn from_positions(positions: Vec<Vec<f64>>) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return invalid("geometry needs at least one site");
        }
        let dim = positions[0].len();
        if positions.iter().any(|p| p.len() != dim) {
            return invalid("all positions must have the same dimension");
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("positions must be finite");
        }
        let distances = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        positions[i]
                            .iter()
                            .zip(&positions[j])
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        let g = Self {
            positions: Some(positions),
            distances,
            allow_nonmetric: false,
        };
        g.validate()?;
        Ok(g)
    }

    /// Raw distance matrix; `allow_nonmetric` waives the triangle check.
    pub fn from_distances(distances: Vec<Vec<f64>>, allow_nonmetric: bool) -> Result<Self> {
        if distances.is_empty() {
            return invalid("geometry needs at least one site");
        }
        let g = Self {
            positions: None,
            distances,
            allow_nonmetric,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n` sites on a line with the given spacing.
    pub fn chain(n: usize, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return invalid("chain spacing must be positive");
        }
        Self::from_positions((0..n).map(|i| vec![i as f64 * spacing]).collect())
    }

    fn validate(&self) -> Result<()> {
        let n = self.distances.len();
        for (i, row) in self.distances.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    return invalid(format!("distance d({i},{j}) is not finite"));
                }
                if i == j && d != 0.0 {
                    return invalid(format!("d({i},{i}) = {d} must be zero"));
                }
                if i != j && d <= 0.0 {
                    return invalid(format!("d({i},{j}) = {d} must be positive"));
                }
                if (d - self.distances[j][i]).abs() > TRIANGLE_TOLERANCE {
                    return invalid(format!("distance matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        if !self.allow_nonmetric {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (ij, ik, kj) = (self.distances[i][j], self.distances[i][k], self.distances[k][j]);
                        if ij > ik + kj + TRIANGLE_TOLERANCE {
                            return invalid(format!(
                                "triangle inequality fails: d({i},{j}) = {ij} > d({i},{k}) + d({k},{j}) = {}",
                                ik + kj
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses `{"positions": …}` or `{"distances": …, "allow_nonmetric": …}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeometryFile = serde_json::from_str(text)?;
        match (file.positions, file.distances) {
            (Some(p), None) => Self::from_positions(p),
            (None, Some(d)) => Self::from_distances(d, file.allow_nonmetric),
            (Some(_), Some(_)) => invalid("geometry JSON must give positions or distances, not both"),
            (None, None) => invalid("geometry JSON needs a positions or distances field"),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = match &self.positions {
            Some(p) => GeometryFile {
                positions: Some(p.clone()),
                distances: None,
                allow_nonmetric: false,
            },
            None => GeometryFile {
                positions: None,
                distances: Some(self.distances.clone()),
                allow_nonmetric: self.allow_nonmetric,
            },
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn positions(&self) -> Option<&[Vec<f64>]> {
        self.positions.as_deref()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    pub fn max_pairwise(&self, sites: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in sites.iter().enumerate() {
            for &j in &sites[a + 1..] {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        match sites.iter().find(|&&s| s >= self.len()) {
            Some(s) => invalid(format!("site {s} outside a {}-site geometry", self.len())),
            None => Ok(()),
        }
    }
}

/// `min_{a∈s1, b∈s2} d(a, b)` for nonempty, disjoint sets.
pub fn set_distance(g: &Geometry, s1: &[usize], s2: &[usize]) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return invalid("set distance needs two nonempty sets");
    }
    g.check_sites(s1)?;
    g.check_sites(s2)?;
    if s1.iter().any(|a| s2.contains(a)) {
        return invalid("set distance needs disjoint sets");
    }
    Ok(s1
        .iter()
        .flat_map(|&a| s2.iter().map(move |&b| g.distance(a, b)))
        .fold(f64::INFINITY, f64::min))
}

fn union(supports: &[Vec<usize>], indices: &[usize]) -> Vec<usize> {
    indices.iter().flat_map(|&i| supports[i].iter().copied()).collect()
}

/// Largest distance between the two sides over all bipartitions of the
/// supports, with the first (lowest canonical) maximiser.
pub fn critical_distance(g: &Geometry, supports: &[Vec<usize>]) -> Result<(f64, Bipartition)> {
    let m = supports.len();
    if m < 2 || m > MAX_SUPPORTS {
        return invalid(format!("critical distance needs 2..={MAX_SUPPORTS} supports, got {m}"));
    }
    let mut seen = std::collections::HashSet::new();
    for s in supports {
        if s.is_empty() {
            return invalid("supports must be nonempty");
        }
        g.check_sites(s)?;
        for &site in s {
            if !seen.insert(site) {
                return invalid(format!("site {site} appears in more than one support"));
            }
        }
    }
    let mut best: Option<(f64, Bipartition)> = None;
    for bp in enumerate_bipartitions(m)? {
        let d = set_distance(g, &union(supports, &bp.first), &union(supports, &bp.second))?;
        if best.as_ref().map_or(true, |(b, _)| d > *b) {
            best = Some((d, bp));
        }
    }
    Ok(best.expect("at least one bipartition"))
}

/// Smallest over bipartitions of the distance between the two sides.
pub fn min_bipartition_distance(g: &Geometry, supports: &[Vec<usize>]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for bp in enumerate_bipartitions(supports.len())? {
        best = best.min(set_distance(g, &union(supports, &bp.first), &union(supports, &bp.second))?);
    }
    Ok(best)
}

/// Bipartite Lieb-Robinson prefactor and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub c2: f64,
    pub v: f64,
}

impl BoundParams {
    pub fn new(c2: f64, v: f64) -> Result<Self> {
        if !(c2 > 0.0 && c2.is_finite()) {
            return invalid(format!("c2 must be positive, got {c2}"));
        }
        if !(v > 0.0 && v.is_finite()) {
            return invalid(format!("v must be positive, got {v}"));
        }
        Ok(Self { c2, v })
    }
}

/// `ln[(n^n/4)·c2·exp(v t − r)]`.
pub fn log_envelope(n: usize, p: &BoundParams, t: f64, r: f64) -> f64 {
    let nf = n as f64;
    nf * nf.ln() - 4f64.ln() + p.c2.ln() + p.v * t - r
}

/// `(n^n/4)·c2·exp(v t − r)`, evaluated through [`log_envelope`]; overflows to
/// `+inf` rather than producing NaN.
pub fn bound_envelope(n: usize, p: &BoundParams, t: f64, r: f64) -> Result<f64> {
    if n < 2 {
        return invalid("the envelope is defined for n >= 2");
    }
    if t < 0.0 || r < 0.0 {
        return invalid("time and distance must be non-negative");
    }
    Ok(log_envelope(n, p, t, r).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub t: f64,
    pub value: f64,
    pub envelope: f64,
    /// `ln envelope − ln |value|`; `+inf` for exact zeros.
    pub log_slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub r: f64,
    pub params: BoundParams,
    pub points: Vec<BoundPoint>,
    pub min_log_slack: f64,
    pub first_violation: Option<f64>,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| !p.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Compares `|u_n(t)|` with the envelope at every point of the series.
/// Non-finite entries are dropped; an empty remaining series is an error.
pub fn check_bound(series: &[(f64, f64)], n: usize, r: f64, p: &BoundParams) -> Result<BoundReport> {
    let mut points = Vec::with_capacity(series.len());
    for &(t, value) in series {
        if !t.is_finite() || !value.is_finite() {
            continue;
        }
        let log_env = log_envelope(n, p, t, r);
        let log_slack = log_env - value.abs().ln();
        points.push(BoundPoint {
            t,
            value,
            envelope: bound_envelope(n, p, t, r)?,
            log_slack,
            pass: log_slack >= -LOG_SLACK_TOLERANCE,
        });
    }
    if points.is_empty() {
        return invalid("bound check needs at least one finite (t, value) point");
    }
    let min_log_slack = points.iter().map(|p| p.log_slack).fold(f64::INFINITY, f64::min);
    let first_violation = points.iter().find(|p| !p.pass).map(|p| p.t);
    Ok(BoundReport {
        n,
        r,
        params: *p,
        points,
        min_log_slack,
        first_violation,
    })
}

/// Two-point probe used for calibration: `u2(A_i, B_j)` in the evolved
/// initial state for every site pair and every time.
#[derive(Debug, Clone)]
pub struct CalibrationProbe {
    pub initial: StateVector,
    pub left: Pauli,
    pub right: Pauli,
    pub times: Vec<f64>,
}

impl CalibrationProbe {
    /// `|0…0⟩`, `Z`–`Z` probe.
    pub fn zz(n: usize, times: Vec<f64>) -> Result<Self> {
        Ok(Self {
            initial: StateVector::basis(n, 0)?,
            left: Pauli::Z,
            right: Pauli::Z,
            times,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSample {
    pub t: f64,
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub u2: f64,
    /// `ln c2 + v t − r − ln|u2|`, non-negative by construction.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub params: BoundParams,
    pub samples: Vec<CalibrationSample>,
    /// Samples below [`CALIBRATION_FLOOR`] that were left out of the fit.
    pub skipped: usize,
}

/// Largest site count accepted by [`calibrate_velocity`].
pub const CALIBRATION_SITE_LIMIT: usize = 12;

/// Fits the smallest envelope `ln c2 + v t − r` lying above every sample
/// `ln|u2(t, r)|`.
///
/// With `y = ln|u2| + r` the constraint is a line above the points `(t, y)`;
/// among those lines the one with the lowest value at the midpoint of the
/// time grid is chosen, which is the upper-hull edge spanning the midpoint.
/// Non-positive slopes are replaced by [`MIN_VELOCITY`].
pub fn calibrate_velocity(g: &Geometry, h: &Hamiltonian, probe: &CalibrationProbe) -> Result<Calibration> {
    let n = h.n();
    if n > CALIBRATION_SITE_LIMIT {
        return Err(Error::Resource(format!(
            "calibration simulates {n} sites densely; limit is {CALIBRATION_SITE_LIMIT}"
        )));
    }
    if g.len() != n || probe.initial.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if g.len() != n { g.len() } else { probe.initial.n() },
        });
    }
    if n < 2 {
        return invalid("calibration needs at least two sites");
    }
    if probe.times.is_empty() || probe.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return invalid("calibration times must be finite, non-negative and nonempty");
    }

    let mut raw = Vec::new();
    let mut skipped = 0;
    for &t in &probe.times {
        let state = Propagator::new(h, t)?.apply(&probe.initial)?;
        for i in 0..n {
            for j in i + 1..n {
                let value = u2(
                    &state,
                    &Observable::pauli(i, probe.left),
                    &Observable::pauli(j, probe.right),
                )?;
                if value.abs() < CALIBRATION_FLOOR {
                    skipped += 1;
                    continue;
                }
                raw.push((t, i, j, g.distance(i, j), value));
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::Calibration(format!(
            "every two-point correlator is below {CALIBRATION_FLOOR:e}"
        )));
    }

    let points: Vec<(f64, f64)> = raw.iter().map(|&(t, _, _, r, u)| (t, u.abs().ln() + r)).collect();
    let t_min = probe.times.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = probe.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = supporting_slope(&points, 0.5 * (t_min + t_max));
    let v = if slope > MIN_VELOCITY { slope } else { MIN_VELOCITY };
    let intercept = points.iter().map(|&(t, y)| y - v * t).fold(f64::NEG_INFINITY, f64::max);
    let params = BoundParams::new(intercept.exp(), v)?;

    let samples = raw
        .into_iter()
        .map(|(t, i, j, r, u)| CalibrationSample {
            t,
            i,
            j,
            r,
            u2: u,
            residual: intercept + v * t - r - u.abs().ln(),
        })
        .collect();
    Ok(Calibration {
        params,
        samples,
        skipped,
    })
}

/// Slope of the upper-hull edge of `points` spanning `t_mid`.
fn supporting_slope(points: &[(f64, f64)], t_mid: f64) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // keep the highest y per t
    let mut top: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        match top.last_mut() {
            Some(last) if last.0 == p.0 => *last = p,
            _ => top.push(p),
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in top {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a → p
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if hull.len() < 2 {
        return 0.0;
    }
    let k = hull
        .windows(2)
        .position(|w| w[1].0 > t_mid)
        .unwrap_or(hull.len() - 2);
    let (a, b) = (hull[k], hull[k + 1]);
    (b.1 - a.1) / (b.0 - a.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear() -> Geometry {
        Geometry::from_positions(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap()
    }

    #[test]
    fn set_distances() {
        let g = collinear();
        assert_eq!(set_distance(&g, &[0], &[1, 2]).unwrap(), 1.0);
        assert_eq!(set_distance(&g, &[2], &[0, 1]).unwrap(), 2.0);
        assert!(set_distance(&g, &[0], &[0, 1]).is_err());
        assert!(set_distance(&g, &[], &[1]).is_err());
        assert!(set_distance(&g, &[7], &[1]).is_err());
    }

    #[test]
    fn collinear_critical_distance() {
        let g = collinear();
        let (r, bp) = critical_distance(&g, &[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(r, 2.0);
        assert_eq!(bp.second, vec![2]);
        let (r2, _) = critical_distance(&g, &[vec![0], vec![2]]).unwrap();
        assert_eq!(r2, 3.0);
        assert!(critical_distance(&g, &[vec![0], vec![0, 1]]).is_err());
        assert!(critical_distance(&g, &[vec![0]]).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::from_distances(vec![vec![0.0, 1.0], vec![2.0, 0.0]], false).is_err());
        assert!(Geometry::from_distances(vec![vec![0.0, 0.0], vec![0.0, 0.0]], false).is_err());
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(Geometry::from_distances(bad.clone(), false).is_err());
        assert!(Geometry::from_distances(bad, true).is_ok());
        assert!(Geometry::from_positions(vec![vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn geometry_json() {
        let g = Geometry::from_json(r#"{"positions": [[0], [1], [3]]}"#).unwrap();
        assert_eq!(g, collinear());
        let d = Geometry::from_json(r#"{"distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "allow_nonmetric": true}"#)
            .unwrap();
        assert_eq!(d.distance(0, 2), 5.0);
        assert!(Geometry::from_json(r#"{"distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}"#).is_err());
        assert!(Geometry::from_json("{}").is_err());
        assert_eq!(Geometry::from_json(&d.to_json().unwrap()).unwrap(), d);
    }

    #[test]
    fn envelope_values() {
        let p = BoundParams::new(1.0, 1.0).unwrap();
        assert!((bound_envelope(2, &p, 3.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
        let p3 = BoundParams::new(2.0, 1.0).unwrap();
        assert!((bound_envelope(3, &p3, 0.0, 0.0).unwrap() - 27.0 / 4.0 * 2.0).abs() < 1e-12);
        let expected = 10.0 * 10f64.ln() - 4f64.ln() - 50.0;
        assert!((log_envelope(10, &p, 0.0, 50.0) - expected).abs() < 1e-12);
        assert!(bound_envelope(1, &p, 0.0, 0.0).is_err());
        assert!(bound_envelope(2, &p, -1.0, 0.0).is_err());
        assert!(BoundParams::new(0.0, 1.0).is_err());
        assert!(BoundParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn check_bound_reports_violation() {
        let p = BoundParams::new(1.0, 1.0).unwrap();
        let series = [(0.0, 0.1), (1.0, 1e6), (2.0, 0.0)];
        let rep = check_bound(&series, 2, 1.0, &p).unwrap();
        assert_eq!(rep.first_violation, Some(1.0));
        assert_eq!(rep.violations(), 1);
        assert!(rep.min_log_slack < 0.0);
        assert!(rep.points[2].pass);
        assert!(check_bound(&[(f64::NAN, 1.0)], 2, 1.0, &p).is_err());
    }

    #[test]
    fn hull_slope() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (2.0, 1.0), (3.0, 3.0)];
        // upper hull: (0,0)-(1,2)-(3,3); midpoint 1.5 lies on the second edge
        assert!((supporting_slope(&pts, 1.5) - 0.5).abs() < 1e-15);
        assert!((supporting_slope(&pts, 0.5) - 2.0).abs() < 1e-15);
        assert_eq!(supporting_slope(&[(1.0, 1.0)], 1.0), 0.0);
    }

    #[test]
    fn calibration_needs_signal() {
        let h = Hamiltonian::pauli_chain(4, Pauli::X, &[0.0; 3]).unwrap();
        let probe = CalibrationProbe::zz(4, vec![0.0, 0.5, 1.0]).unwrap();
        let g = Geometry::chain(4, 1.0).unwrap();
        assert!(matches!(calibrate_velocity(&g, &h, &probe), Err(Error::Calibration(_))));
    }

    #[test]
    fn calibration_on_xx_chain() {
        let n = 6;
        let h = Hamiltonian::xx_chain(n).unwrap();
        let times: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();
        let probe = CalibrationProbe::zz(n, times).unwrap();
        let g = Geometry::chain(n, 1.0).unwrap();
        let cal = calibrate_velocity(&g, &h, &probe).unwrap();
        assert!(cal.params.v > 0.0 && cal.params.v.is_finite());
        assert!(cal.samples.iter().all(|s| s.residual >= -1e-12));
    }
}
