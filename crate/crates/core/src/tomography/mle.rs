use super::{CountRecord, DensityMatrix, ProjectorSetting};
use crate::error::{Error, Result};
use crate::jones::{JonesMatrix, JonesVector, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleSettings {
    pub max_iterations: usize,
    /// Stop once an accepted step improves the objective by less than
    /// `tolerance·max(1, |f|)`.
    pub tolerance: f64,
}

impl Default for MleSettings {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleFit {
    pub rho: DensityMatrix,
    pub iterations: usize,
    /// Poisson deviance after every accepted iterate, starting with
    /// the initial point.
    pub objective_trace: Vec<f64>,
}

/// One count cell: analyzer projector, detector efficiency, observed count.
struct Cell {
    p: JonesVector,
    eff: f64,
    n: f64,
}

/// `G = [[t0, 0], [t2 + i·t3, t1]]`.
fn lower_triangular(t: &[f64; 4]) -> JonesMatrix {
    JonesMatrix::new(
        C64::new(t[0], 0.0),
        C64::new(0.0, 0.0),
        C64::new(t[2], t[3]),
        C64::new(t[1], 0.0),
    )
}

struct Objective {
    cells: Vec<Cell>,
}

impl Objective {
    fn new(counts: &CountRecord) -> Self {
        let mut cells = Vec::with_capacity(6);
        for setting in ProjectorSetting::all() {
            for (d, p) in setting.projectors().into_iter().enumerate() {
                cells.push(Cell {
                    p,
                    eff: counts.detector_efficiency[d],
                    n: counts.get(setting.basis, d) as f64,
                });
            }
        }
        Self { cells }
    }

    /// Expected count `e·‖G p‖²` and its gradient with respect to `t`.
    fn rate(t: &[f64; 4], cell: &Cell) -> (f64, [f64; 4]) {
        let (p1, p2) = (cell.p.a1, cell.p.a2);
        let c = C64::new(t[2], t[3]);
        let w = c * p1 + p2 * t[1];
        let lambda = t[0] * t[0] * p1.norm_sqr() + w.norm_sqr();
        let wp1 = w.conj() * p1;
        let grad = [
            2.0 * t[0] * p1.norm_sqr(),
            2.0 * (w.conj() * p2).re,
            2.0 * wp1.re,
            -2.0 * wp1.im,
        ];
        (cell.eff * lambda, grad.map(|g| cell.eff * g))
    }

    /// Poisson deviance `Σ λ − n − n·ln(λ/n)`: the negative log-likelihood
    /// shifted so that it vanishes for a perfect fit.
    fn value(&self, t: &[f64; 4]) -> f64 {
        self.cells
            .iter()
            .map(|cell| {
                let (lambda, _) = Self::rate(t, cell);
                if cell.n > 0.0 {
                    lambda - cell.n - cell.n * (lambda / cell.n).ln()
                } else {
                    lambda
                }
            })
            .sum()
    }

    fn gradient(&self, t: &[f64; 4]) -> [f64; 4] {
        let mut g = [0.0; 4];
        for cell in &self.cells {
            let (lambda, dl) = Self::rate(t, cell);
            let w = if cell.n > 0.0 {
                1.0 - cell.n / lambda
            } else {
                1.0
            };
            for k in 0..4 {
                g[k] += w * dl[k];
            }
        }
        g
    }
}

fn to_density(t: &[f64; 4]) -> Result<DensityMatrix> {
    let g = lower_triangular(t);
    let unnorm = g.dagger() * g;
    let tr = unnorm.trace().re;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::DegenerateData(
            "reconstruction collapsed to the zero matrix".into(),
        ));
    }
    let mut m = unnorm.scale(C64::new(1.0 / tr, 0.0));
    m.m11.im = 0.0;
    m.m22.im = 0.0;
    m.m12 = m.m21.conj();
    DensityMatrix::new(m)
}

/// Linear-inversion estimate, shrunk into the interior of the Bloch ball,
/// converted to Cholesky parameters scaled to the observed count level.
fn initial_point(counts: &CountRecord) -> [f64; 4] {
    let eff = counts.detector_efficiency;
    let mut bloch = [0.0; 3];
    let mut level = 0.0;
    let mut used = 0.0;
    // Bloch components in (X, Y, Z) order; settings come in Z, X, Y order.
    for (setting, slot) in ProjectorSetting::all().iter().zip([2usize, 0, 1]) {
        let plus = counts.get(setting.basis, 0) as f64 / eff[0];
        let minus = counts.get(setting.basis, 1) as f64 / eff[1];
        if plus + minus > 0.0 {
            bloch[slot] = (plus - minus) / (plus + minus);
            level += plus + minus;
            used += 1.0;
        }
    }
    let r = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
    let shrink = if r > 0.95 { 0.95 / r } else { 1.0 };
    let [x, y, z] = bloch.map(|b| b * shrink);
    let level = if used > 0.0 { level / used } else { 1.0 };
    // ρ = (I + r·σ)/2 scaled by `level`, then ρ = G†G with
    // G = [[a, 0], [c, b]]: b = √ρ22, c = ρ21/b, a = √(ρ11 − |c|²).
    let r11 = level * 0.5 * (1.0 + z);
    let r22 = level * 0.5 * (1.0 - z);
    let r21 = C64::new(0.5 * x, 0.5 * y) * level;
    let b = r22.sqrt();
    let c = r21 / b;
    let a = (r11 - c.norm_sqr()).max(0.0).sqrt();
    [a, b, c.re, c.im]
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum-likelihood reconstruction with the default optimizer settings.
pub fn mle_reconstruct(counts: &CountRecord) -> Result<DensityMatrix> {
    mle_fit(counts, &MleSettings::default()).map(|fit| fit.rho)
}

/// BFGS on the four Cholesky parameters with an Armijo backtracking line
/// search; only strictly improving steps are accepted, so the objective
/// trace is nonincreasing.
pub fn mle_fit(counts: &CountRecord, settings: &MleSettings) -> Result<MleFit> {
    if counts.total() == 0 {
        return Err(Error::DegenerateData("all count cells are zero".into()));
    }
    if counts
        .detector_efficiency
        .iter()
        .any(|e| !(*e > 0.0) || !e.is_finite())
    {
        return Err(Error::invalid("detector efficiencies must be positive"));
    }
    let objective = Objective::new(counts);
    let mut t = initial_point(counts);
    let mut f = objective.value(&t);
    let mut g = objective.gradient(&t);
    let mut trace = vec![f];
    let mut h = identity4(0.1);
    let mut first_step = true;

    for iteration in 1..=settings.max_iterations {
        let mut dir = mat_vec(&h, &g).map(|x| -x);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            h = identity4(0.1);
            dir = g.map(|x| -0.1 * x);
            slope = dot(&g, &dir);
            if !(slope < 0.0) {
                // zero gradient: stationary point
                return finish(t, iteration - 1, trace);
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: [f64; 4] = std::array::from_fn(|k| t[k] + step * dir[k]);
            let f_trial = objective.value(&trial);
            if f_trial.is_finite() && f_trial <= f + 1e-4 * step * slope && f_trial < f {
                accepted = Some((trial, f_trial));
                break;
            }
            step *= 0.5;
        }
        let Some((t_new, f_new)) = accepted else {
            // No representable decrease along a descent direction.
            return finish(t, iteration - 1, trace);
        };

        let g_new = objective.gradient(&t_new);
        let s: [f64; 4] = std::array::from_fn(|k| t_new[k] - t[k]);
        let y: [f64; 4] = std::array::from_fn(|k| g_new[k] - g[k]);
        let improvement = f - f_new;
        t = t_new;
        f = f_new;
        g = g_new;
        trace.push(f);

        if improvement < settings.tolerance * f.abs().max(1.0) {
            return finish(t, iteration, trace);
        }

        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if first_step {
                let scale = sy / dot(&y, &y);
                h = identity4(scale);
                first_step = false;
            }
            h = bfgs_update(&h, &s, &y, sy);
        }
    }
    let best = to_density(&t)?;
    Err(Error::Convergence {
        iterations: settings.max_iterations,
        best: Box::new(best),
    })
}

fn finish(t: [f64; 4], iterations: usize, objective_trace: Vec<f64>) -> Result<MleFit> {
    Ok(MleFit {
        rho: to_density(&t)?,
        iterations,
        objective_trace,
    })
}

type Mat4 = [[f64; 4]; 4];

fn identity4(scale: f64) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { scale } else { 0.0 }))
}

fn mat_vec(m: &Mat4, v: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| dot(&m[i], v))
}

/// Inverse-Hessian BFGS update
/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &Mat4, s: &[f64; 4], y: &[f64; 4], sy: f64) -> Mat4 {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            h[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j]
        })
    })
}
