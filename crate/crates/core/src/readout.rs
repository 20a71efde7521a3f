//! Charge readout: estimating `|β|²` from the probability of finding the
//! electron in the right dot.
//!
//! With `ψ = α|0⟩ + β|1⟩` the right-dot probability is
//! `P_R = |α|² P_0R + |β|² P_1R + 2η Re(α*β)`, where `η` is the overlap of
//! the two logical wave functions on the right half line. Inverting with
//! `η` set to zero gives the estimator; the neglected term is the error.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::tdse::{Grid1D, PotentialSpec, SpectralPair, Wavefunction1D};

/// Readout constants of a device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    /// Right-dot probability of `|0⟩`.
    pub p0r: f64,
    /// Right-dot probability of `|1⟩`.
    pub p1r: f64,
    /// `∫_right ψ0 ψ1 dx`; the left-half overlap is `−eta`.
    pub eta: f64,
    /// Dot boundary in nm.
    pub split_x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutEstimate {
    pub beta_sq_estimate: f64,
    pub alpha_sq_estimate: f64,
    /// `|η| / (P_1R − P_0R)`; reduces to `|η|` for ideal dots.
    pub error_bound: f64,
    /// Set when an estimate lies outside `[0, 1]`. Values are never clipped.
    pub out_of_range: bool,
}

/// Dot boundary: the symmetry point for a symmetric potential, otherwise
/// the highest point of the unbiased potential between the wells.
pub fn dot_boundary(spec: &PotentialSpec, grid: &Grid1D) -> f64 {
    let flat = spec.with_bias(0.0);
    if flat.asymmetry == 0.0 {
        return 0.0;
    }
    // barrier top between the two local minima nearest the centre
    let xs = grid.xs();
    let v: Vec<f64> = xs.iter().map(|&x| flat.potential(x)).collect();
    let centre = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut i = centre;
    while i + 1 < v.len() && v[i + 1] > v[i] {
        i += 1;
    }
    while i > 0 && v[i - 1] > v[i] {
        i -= 1;
    }
    xs[i]
}

/// Weight of grid point `i` on the right of `split_x`; a point on the
/// boundary counts half.
fn right_weight(x: f64, split_x: f64, dx: f64) -> f64 {
    let d = x - split_x;
    if d.abs() <= 1e-9 * dx {
        0.5
    } else if d > 0.0 {
        1.0
    } else {
        0.0
    }
}

fn right_integral(f: impl Fn(usize) -> f64, grid: &Grid1D, split_x: f64) -> f64 {
    let dx = grid.dx();
    (0..grid.n_points)
        .map(|i| right_weight(grid.x(i), split_x, dx) * f(i))
        .sum::<f64>()
        * dx
}

/// `P_R = ∫_right |ψ|² dx`.
pub fn measure_p_right(wf: &Wavefunction1D, grid: &Grid1D, split_x: f64) -> f64 {
    right_integral(|i| wf.u[i] * wf.u[i] + wf.v[i] * wf.v[i], grid, split_x)
}

/// Overlaps `(right, left)` of the logical wave functions.
pub fn half_line_overlaps(basis: &SpectralPair, grid: &Grid1D, split_x: f64) -> (f64, f64) {
    let z = basis.logical_zero();
    let o = basis.logical_one();
    let right = right_integral(|i| z[i] * o[i], grid, split_x);
    let total: f64 = z.iter().zip(&o).map(|(a, b)| a * b).sum::<f64>() * grid.dx();
    (right, total - right)
}

pub fn calibrate_readout(basis: &SpectralPair, grid: &Grid1D, split_x: f64) -> ReadoutCalibration {
    let z = basis.logical_zero();
    let o = basis.logical_one();
    ReadoutCalibration {
        p0r: right_integral(|i| z[i] * z[i], grid, split_x),
        p1r: right_integral(|i| o[i] * o[i], grid, split_x),
        eta: half_line_overlaps(basis, grid, split_x).0,
        split_x,
    }
}

pub fn estimate_amplitudes(p_right: f64, cal: &ReadoutCalibration) -> Result<ReadoutEstimate> {
    let contrast = cal.p1r - cal.p0r;
    if !(contrast.abs() > f64::EPSILON) {
        return Err(domain("degenerate readout calibration (P_1R = P_0R)"));
    }
    let beta_sq = (p_right - cal.p0r) / contrast;
    let alpha_sq = (cal.p1r - p_right) / contrast;
    let outside = |p: f64| !(0.0..=1.0).contains(&p);
    Ok(ReadoutEstimate {
        beta_sq_estimate: beta_sq,
        alpha_sq_estimate: alpha_sq,
        error_bound: cal.eta.abs() / contrast.abs(),
        out_of_range: outside(beta_sq) || outside(alpha_sq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdse::spectral_pair;

    fn setup() -> (SpectralPair, Grid1D, PotentialSpec) {
        let g = Grid1D::reference().with_points(512).unwrap();
        let s = PotentialSpec::reference();
        (spectral_pair(&s, &g).unwrap(), g, s)
    }

    #[test]
    fn mirror_symmetry() {
        let (p, g, s) = setup();
        let cal = calibrate_readout(&p, &g, dot_boundary(&s, &g));
        assert!((cal.p0r + cal.p1r - 1.0).abs() < 1e-10);
        assert!(cal.p0r < cal.p1r);
        let (r, l) = half_line_overlaps(&p, &g, 0.0);
        assert!((r + l).abs() < 1e-10);
        let bonding = Wavefunction1D::from_real(&p.psi_bonding, p.dx);
        assert!((measure_p_right(&bonding, &g, 0.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn calibration_endpoints() {
        let (p, g, _) = setup();
        let cal = calibrate_readout(&p, &g, 0.0);
        let e = estimate_amplitudes(cal.p0r, &cal).unwrap();
        assert!(e.beta_sq_estimate.abs() < 1e-12);
        let e = estimate_amplitudes(cal.p1r, &cal).unwrap();
        assert!((e.beta_sq_estimate - 1.0).abs() < 1e-12);
        assert!((e.alpha_sq_estimate + e.beta_sq_estimate - 1.0).abs() < 1e-12);
        let one = Wavefunction1D::from_real(&p.logical_one(), p.dx);
        assert!((measure_p_right(&one, &g, 0.0) - cal.p1r).abs() < 1e-14);
    }

    #[test]
    fn degenerate_calibration_rejected() {
        let cal = ReadoutCalibration {
            p0r: 0.5,
            p1r: 0.5,
            eta: 0.0,
            split_x: 0.0,
        };
        assert!(estimate_amplitudes(0.5, &cal).is_err());
    }

    #[test]
    fn mirror_images_have_no_overlap() {
        // ψ0ψ1 = (ψAB² − ψB²)/2 and both squares carry half their weight
        // on each side, so η vanishes at every barrier height
        let g = Grid1D::reference().with_points(512).unwrap();
        for b in [2.0, 4.08, 8.0, 16.0] {
            let s = PotentialSpec {
                b_height: b,
                ..PotentialSpec::reference()
            };
            let p = spectral_pair(&s, &g).unwrap();
            let cal = calibrate_readout(&p, &g, 0.0);
            assert!(cal.eta.abs() < 1e-8, "B {b}: {}", cal.eta);
            assert!(cal.p0r < 0.02);
        }
    }

    #[test]
    fn asymmetric_boundary_at_barrier_top() {
        let g = Grid1D::reference();
        let s = PotentialSpec {
            asymmetry: 0.3,
            ..PotentialSpec::reference()
        };
        let x = dot_boundary(&s, &g);
        assert!(x.abs() < 50.0);
        let dx = g.dx();
        assert!(s.potential(x) >= s.potential(x - dx) && s.potential(x) >= s.potential(x + dx));
    }
}
