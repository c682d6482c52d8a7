//! Frequency decompositions: dyadic bands, cube projections, the
//! near-diagonal split of a product `Sf Sg` into pieces `B_j`, and the
//! bilinear extension ratio.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{admissibility_threshold, time_weights};
use crate::propagator::{elliptic_evolve, evolve, DispersionParams, EllipticPhase};
use crate::spectral::{CutoffSpec, Field, GridSpec, Representation};

/// Largest number of active modes per factor in [`bilinear_piece`].
pub const MAX_ACTIVE_MODES: usize = 512;

fn radius(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn lattice_reach(grid: &GridSpec) -> f64 {
    grid.nyquist() * (grid.dim() as f64).sqrt()
}

/// `L_k f = F^-1[chi_k(|xi|) fhat]` with `chi_0` the low cutoff and
/// `chi_k = chi(2^-k .)` for `k >= 1`.
pub fn band_project(f: &Field, k: u32) -> Result<Field> {
    if k >= 1 && 2f64.powi(k as i32 - 1) >= lattice_reach(f.grid()) {
        return Err(Error::Aliasing(format!(
            "band {k} starts at |xi| = {} beyond the lattice reach {:.6}",
            2f64.powi(k as i32 - 1),
            lattice_reach(f.grid())
        )));
    }
    let cut = CutoffSpec::default();
    f.apply_symbol(&|xi: &[f64]| Complex64::new(cut.lp_piece(k, radius(xi)), 0.0))
}

/// `T_k f(t) = U_t L_k f`.
pub fn evolve_band(f: &Field, k: u32, t: f64, params: &DispersionParams) -> Result<Field> {
    evolve(&band_project(f, k)?, t, params)
}

/// Cube `Q_{j,n}` of side `2^j lambda^(-1/2)` centred at `2^j lambda^(-1/2) n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeIndex {
    pub j: u32,
    pub n: Vec<i64>,
    pub lambda: f64,
}

impl CubeIndex {
    pub fn side(&self) -> f64 {
        2f64.powi(self.j as i32) / self.lambda.sqrt()
    }

    /// Smooth cube weight `vartheta(lambda^(1/2) 2^-j xi - n)`.
    pub fn weight(&self, cut: &CutoffSpec, xi: &[f64]) -> f64 {
        let s = self.side();
        xi.iter()
            .zip(&self.n)
            .map(|(&v, &n)| cut.vartheta_1d(v / s - n as f64))
            .product()
    }
}

/// `P_{j,n} f = F^-1[beta_{j,n} fhat]`.
pub fn cube_project(f: &Field, c: &CubeIndex) -> Result<Field> {
    let grid = f.grid();
    if c.n.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "cube index has {} coordinates on a {}-dimensional grid",
            c.n.len(),
            grid.dim()
        )));
    }
    if !(c.lambda.is_finite() && c.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {}",
            c.lambda
        )));
    }
    let s = c.side();
    for &n in &c.n {
        let reach = s * (n.abs() as f64 + 0.6);
        if reach > grid.nyquist() {
            return Err(Error::Aliasing(format!(
                "cube {:?} at scale {s} reaches {reach}, beyond the lattice band {}",
                c.n,
                grid.nyquist()
            )));
        }
    }
    let cut = CutoffSpec::default();
    f.apply_symbol(&|xi: &[f64]| Complex64::new(c.weight(&cut, xi), 0.0))
}

/// Every cube index at scale `j` whose support meets the spectral support of `f`.
pub fn cube_cover(f: &Field, j: u32, lambda: f64) -> Result<Vec<CubeIndex>> {
    let spectrum = f.to_frequency()?;
    let grid = spectrum.grid();
    let side = 2f64.powi(j as i32) / lambda.sqrt();
    let mut seen = std::collections::BTreeSet::new();
    for (i, z) in spectrum.samples().iter().enumerate() {
        if *z == Complex64::new(0.0, 0.0) {
            continue;
        }
        let xi = grid.frequency_vector(i);
        // supports of neighbouring translates overlap by 1/5 on each side
        let ranges: Vec<(i64, i64)> = xi
            .iter()
            .map(|v| {
                let u = v / side;
                ((u - 0.6).ceil() as i64, (u + 0.6).floor() as i64)
            })
            .collect();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            seen.insert(idx.clone());
            let mut axis = 0;
            loop {
                if axis == idx.len() {
                    break;
                }
                if idx[axis] < ranges[axis].1 {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = ranges[axis].0;
                axis += 1;
            }
            if axis == idx.len() {
                break;
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|n| CubeIndex { j, n, lambda })
        .collect())
}

/// Near-diagonal weight `Theta_j(xi, eta)`: `chi0(lambda^(1/2)|xi - eta|)`
/// for `j = 0` and the dyadic difference of those cutoffs at scale `2^j`
/// otherwise, with the radial cutoff plateau `8 sqrt(d)`.
pub fn theta_weight(j: u32, lambda: f64, xi: &[f64], eta: &[f64]) -> f64 {
    theta_weight_with(&CutoffSpec::default(), j, lambda, xi, eta)
}

fn theta_weight_with(cut: &CutoffSpec, j: u32, lambda: f64, xi: &[f64], eta: &[f64]) -> f64 {
    let d = xi.len();
    let gap = xi
        .iter()
        .zip(eta)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let u = lambda.sqrt() * gap / 2f64.powi(j as i32);
    if j == 0 {
        cut.chi0_radial(u, d)
    } else {
        cut.chi0_radial(u, d) - cut.chi0_radial(2.0 * u, d)
    }
}

/// Smallest `J` with `8 sqrt(d) 2^J lambda^(-1/2) >= gap`, so that the
/// weights `Theta_0 .. Theta_J` sum to one on all pairs closer than `gap`.
pub fn covering_scale(gap: f64, lambda: f64, dim: usize) -> u32 {
    let unit = 8.0 * (dim as f64).sqrt() / lambda.sqrt();
    let mut j = 0;
    while unit * 2f64.powi(j as i32) < gap {
        j += 1;
    }
    j
}

/// One near-diagonal piece `B_j[f, g]` sampled on the grid points at each
/// time; `values[i * N^d + n]` is the value at `t_samples[i]`, point `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearPiece {
    pub j: u32,
    pub lambda: f64,
    pub grid: GridSpec,
    pub t_samples: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl BilinearPiece {
    /// Samples at the `i`-th time.
    pub fn frame(&self, i: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

struct Mode {
    index: Vec<i64>,
    xi: Vec<f64>,
    coef: Complex64,
    phase: f64,
}

fn active_modes(f: &Field, ep: &EllipticPhase) -> Result<Vec<Mode>> {
    let spectrum = f.to_frequency()?;
    let grid = spectrum.grid();
    let mut idx = vec![0usize; grid.dim()];
    let mut modes = Vec::new();
    for (i, z) in spectrum.samples().iter().enumerate() {
        if *z == Complex64::new(0.0, 0.0) {
            continue;
        }
        let xi = grid.frequency_vector(i);
        let a = ep.amplitude(&xi);
        if a == 0.0 {
            continue;
        }
        grid.unravel(i, &mut idx);
        modes.push(Mode {
            index: idx.iter().map(|&k| grid.signed_mode(k)).collect(),
            phase: ep.phase(&xi),
            xi,
            coef: z * a,
        });
    }
    Ok(modes)
}

fn check_pair(f: &Field, g: &Field, ep: &EllipticPhase) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::InvalidGrid("both factors must share a grid".into()));
    }
    if f.grid().dim() != ep.dim() {
        return Err(Error::Dimension(format!(
            "{}-dimensional phase on a {}-dimensional grid",
            ep.dim(),
            f.grid().dim()
        )));
    }
    Ok(())
}

/// Direct double lattice sum
/// `B_j(x, t) = (2L)^(-2d) sum_{xi, eta} Theta_j(xi, eta) chi(xi) chi(eta)
/// fhat(xi) ghat(eta) exp(i(x.(xi + eta) + t(phi(xi) + phi(eta))))`.
pub fn bilinear_piece(
    f: &Field,
    g: &Field,
    j: u32,
    lambda: f64,
    t_samples: &[f64],
    ep: &EllipticPhase,
) -> Result<BilinearPiece> {
    check_pair(f, g, ep)?;
    let fm = active_modes(f, ep)?;
    let gm = active_modes(g, ep)?;
    pieces_from_modes(f.grid(), &fm, &gm, &[j], lambda, t_samples).map(|mut v| v.remove(0))
}

fn pieces_from_modes(
    grid: &GridSpec,
    fm: &[Mode],
    gm: &[Mode],
    scales: &[u32],
    lambda: f64,
    t_samples: &[f64],
) -> Result<Vec<BilinearPiece>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let m = fm.len().max(gm.len());
    if m > MAX_ACTIVE_MODES {
        return Err(Error::Intractable(format!(
            "{m} active modes exceed the direct-summation cap of {MAX_ACTIVE_MODES}; \
             restrict the data to fewer lattice frequencies or use a coarser lattice"
        )));
    }
    let cut = CutoffSpec::default();
    let n_points = grid.len();
    let norm = (2.0 * grid.half_width()).powi(-2 * grid.dim() as i32);
    let step = grid.frequency_step();
    let positions: Vec<Vec<f64>> = (0..n_points).map(|i| grid.position(i)).collect();

    // weights and sum indices do not depend on t
    let pairs: Vec<(usize, usize, Vec<i64>, Vec<f64>)> = {
        let mut out = Vec::new();
        for (a, p) in fm.iter().enumerate() {
            for (b, q) in gm.iter().enumerate() {
                let w: Vec<f64> = scales
                    .iter()
                    .map(|&j| theta_weight_with(&cut, j, lambda, &p.xi, &q.xi))
                    .collect();
                if w.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let sum: Vec<i64> = p.index.iter().zip(&q.index).map(|(x, y)| x + y).collect();
                out.push((a, b, sum, w));
            }
        }
        out
    };

    let mut pieces: Vec<BilinearPiece> = scales
        .iter()
        .map(|&j| BilinearPiece {
            j,
            lambda,
            grid: *grid,
            t_samples: t_samples.to_vec(),
            values: Vec::with_capacity(t_samples.len() * n_points),
        })
        .collect();

    for &t in t_samples {
        let fc: Vec<Complex64> = fm
            .iter()
            .map(|p| p.coef * Complex64::from_polar(1.0, t * p.phase))
            .collect();
        let gc: Vec<Complex64> = gm
            .iter()
            .map(|q| q.coef * Complex64::from_polar(1.0, t * q.phase))
            .collect();
        for (s, piece) in pieces.iter_mut().enumerate() {
            let mut by_sum: HashMap<&[i64], Complex64> = HashMap::new();
            for (a, b, sum, w) in &pairs {
                if w[s] != 0.0 {
                    *by_sum.entry(sum.as_slice()).or_default() += fc[*a] * gc[*b] * w[s];
                }
            }
            let mut terms: Vec<(Vec<f64>, Complex64)> = by_sum
                .into_iter()
                .map(|(k, v)| (k.iter().map(|&m| m as f64 * step).collect(), v))
                .collect();
            // fixed summation order keeps results reproducible
            terms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let frame: Vec<Complex64> = positions
                .par_iter()
                .map(|x| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (sigma, v) in &terms {
                        let ph: f64 = sigma.iter().zip(x).map(|(a, b)| a * b).sum();
                        acc += v * Complex64::from_polar(1.0, ph);
                    }
                    acc * norm
                })
                .collect();
            piece.values.extend(frame);
        }
    }
    Ok(pieces)
}

/// `max |Sf Sg - sum_j B_j[f, g]| / max |Sf Sg|` over the grid points and
/// sample times, with `Sf Sg` computed by FFT and the pieces by direct
/// summation over `j = 0 ..= J` (see [`covering_scale`]). Zero when the
/// product vanishes.
pub fn bilinear_reconstruction_residual(
    f: &Field,
    g: &Field,
    lambda: f64,
    t_samples: &[f64],
    ep: &EllipticPhase,
) -> Result<f64> {
    check_pair(f, g, ep)?;
    let fm = active_modes(f, ep)?;
    let gm = active_modes(g, ep)?;
    let mut gap = 0.0f64;
    for p in &fm {
        for q in &gm {
            gap = gap.max(radius(
                &p.xi.iter().zip(&q.xi).map(|(a, b)| a - b).collect::<Vec<_>>(),
            ));
        }
    }
    let top = covering_scale(gap, lambda, f.grid().dim());
    let scales: Vec<u32> = (0..=top).collect();
    let pieces = pieces_from_modes(f.grid(), &fm, &gm, &scales, lambda, t_samples)?;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for (i, &t) in t_samples.iter().enumerate() {
        let sf = elliptic_evolve(f, t, ep)?.to_physical()?;
        let sg = elliptic_evolve(g, t, ep)?.to_physical()?;
        for n in 0..f.grid().len() {
            let prod = sf.samples()[n] * sg.samples()[n];
            let sum: Complex64 = pieces.iter().map(|p| p.frame(i)[n]).sum();
            worst = worst.max((prod - sum).norm());
            peak = peak.max(prod.norm());
        }
    }
    Ok(if peak == 0.0 { 0.0 } else { worst / peak })
}

/// Time step used to sample the extension over `[-lambda, lambda]`.
const RESTRICTION_TIME_STEP: f64 = 0.25;

/// `|| E h1 E h2 ||_{L^(p/2)(Q_lambda x [-lambda, lambda])} / (||h1||_2 ||h2||_2)`
/// where `E h(x, t) = int h(xi) exp(i(x.xi + t phi(xi))) dxi` and `Q_lambda`
/// is the cube of half side `lambda`.
///
/// The supports (nonzero lattice samples) must be at least `separation`
/// apart; the default is a quarter of the diameter of their union.
pub fn bilinear_restriction_ratio(
    h1: &Field,
    h2: &Field,
    p: f64,
    lambda: f64,
    ep: &EllipticPhase,
    separation: Option<f64>,
) -> Result<f64> {
    check_pair(h1, h2, ep)?;
    for h in [h1, h2] {
        if h.representation() != Representation::Frequency {
            return Err(Error::WrongRepresentation {
                expected: "frequency",
                found: h.representation().name(),
            });
        }
    }
    let grid = *h1.grid();
    let d = grid.dim();
    if !(p > admissibility_threshold(d)) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must exceed {}",
            admissibility_threshold(d)
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let support = |h: &Field| -> Vec<Vec<f64>> {
        h.samples()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(i, _)| grid.frequency_vector(i))
            .collect()
    };
    let (s1, s2) = (support(h1), support(h2));
    if s1.is_empty() || s2.is_empty() {
        return Ok(0.0);
    }
    let dist = |a: &[f64], b: &[f64]| radius(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
    let mut gap = f64::INFINITY;
    for a in &s1 {
        for b in &s2 {
            gap = gap.min(dist(a, b));
        }
    }
    let all: Vec<&Vec<f64>> = s1.iter().chain(&s2).collect();
    let lo: Vec<f64> = (0..d).map(|k| all.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|k| all.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let diameter = dist(&lo, &hi);
    let required = separation.unwrap_or(0.25 * diameter);
    if gap < required {
        return Err(Error::InvalidParameter(format!(
            "supports are {gap} apart, less than the required separation {required}"
        )));
    }
    // largest group speed on the supports bounds how far waves travel
    let h = 1e-6;
    let mut speed = 0.0f64;
    for xi in &all {
        let mut q = xi.to_vec();
        let mut grad2 = 0.0;
        for k in 0..d {
            q[k] = xi[k] + h;
            let up = ep.phase(&q);
            q[k] = xi[k] - h;
            let down = ep.phase(&q);
            q[k] = xi[k];
            grad2 += ((up - down) / (2.0 * h)).powi(2);
        }
        speed = speed.max(grad2.sqrt());
    }
    let needed = lambda * (1.0 + speed);
    if grid.half_width() < needed {
        return Err(Error::Aliasing(format!(
            "half width {} cannot hold waves leaving the cube of half side {lambda} by time {lambda}; \
             use at least {needed}",
            grid.half_width()
        )));
    }

    let steps = (2.0 * lambda / RESTRICTION_TIME_STEP).ceil() as usize;
    let ts: Vec<f64> = (0..=steps)
        .map(|i| -lambda + 2.0 * lambda * i as f64 / steps as f64)
        .collect();
    let weights = time_weights(&ts, (-lambda, lambda));
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.position(i).iter().all(|v| v.abs() <= lambda))
        .collect();
    let scale = (2.0 * std::f64::consts::PI).powi(d as i32);
    let half_p = 0.5 * p;
    let vol = grid.cell_volume();
    let powers: Vec<f64> = ts
        .par_iter()
        .map(|&t| -> Result<f64> {
            let ext = |h: &Field| {
                h.apply_symbol(&|xi: &[f64]| Complex64::from_polar(scale, t * ep.phase(xi)))?
                    .dft_inverse()
            };
            let (e1, e2) = (ext(h1)?, ext(h2)?);
            Ok(inside
                .iter()
                .map(|&i| (e1.samples()[i] * e2.samples()[i]).norm().powf(half_p))
                .sum::<f64>()
                * vol)
        })
        .collect::<Result<Vec<_>>>()?;
    let integral: f64 = powers.iter().zip(&weights).map(|(a, w)| a * w).sum();
    let l2 = |h: &Field| {
        (h.samples().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.frequency_cell_volume()).sqrt()
    };
    Ok(integral.powf(1.0 / half_p) / (l2(h1) * l2(h2)))
}
