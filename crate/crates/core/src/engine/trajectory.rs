use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::classes::ClassIndex;
use super::coefficients::{central_matrix, ground_periphery};
use super::generator::{build_generator, GeneratorMatrix};
use crate::damping::DampingBasis;
use crate::dynamics::{time_scale, BlochMap, CentralDynamics, DynamicsOptions, Provenance};
use crate::linalg::CsrMatrix;
use crate::state::bloch_to_matrix;
use crate::{ComplexMat2, Error, ModelParams, Result, C64};

/// Taylor terms below this fraction of the state are dropped.
const SERIES_TOL: f64 = 1e-17;
const MAX_ORDER: usize = 40;

/// Central-spin map from the damping-basis engine, tabulated on a uniform
/// grid together with enough time derivatives to evaluate it anywhere.
#[derive(Debug, Clone)]
pub struct EngineDynamics {
    basis: DampingBasis,
    spacing: f64,
    order: usize,
    points: usize,
    /// `[(point · 4 + seed) · (order+1) + derivative] · 4 + r`
    jets: Vec<C64>,
    horizon: f64,
    settled: bool,
    scale: f64,
    block_dims: [usize; 4],
}

struct Seed {
    matrix: CsrMatrix,
    state: Vec<C64>,
    readout: [Option<usize>; 4],
}

impl EngineDynamics {
    pub fn new(params: &ModelParams, opts: &DynamicsOptions) -> Result<Self> {
        let gen = build_generator(params)?;
        Self::from_generator(&gen, params, opts)
    }

    pub fn from_generator(gen: &GeneratorMatrix, params: &ModelParams, opts: &DynamicsOptions) -> Result<Self> {
        opts.validate()?;
        let basis = gen.basis().clone();
        let index: &ClassIndex = gen.class_index();
        let stationary = index.stationary();
        let mut seeds = Vec::with_capacity(4);
        let mut block_dims = [0; 4];
        for n in 0..4 {
            let full = ground_periphery(index, &basis, n);
            let support: Vec<usize> = (0..full.len()).filter(|&i| full[i] != C64::new(0.0, 0.0)).collect();
            let block = gen.matrix().reachable_from(&support);
            let readout = [0, 1, 2, 3].map(|r| block.binary_search(&gen.position(r, stationary)).ok());
            block_dims[n] = block.len();
            seeds.push(Seed {
                matrix: gen.matrix().submatrix(&block),
                state: block.iter().map(|&i| full[i]).collect(),
                readout,
            });
        }

        let scale = time_scale(params);
        let norm = seeds.iter().map(|s| s.matrix.norm_one()).fold(0.0, f64::max);
        let mut spacing = opts.jet_spacing * scale;
        if norm > 0.0 {
            spacing = spacing.min(0.5 / norm);
        }
        let fixed = opts.t_max.map(|t| t * scale);
        let (max_steps, spacing) = match fixed {
            Some(t) => {
                let steps = (t / spacing).ceil().max(1.0) as usize;
                (steps, t / steps as f64)
            }
            None => {
                let cap = opts.horizon_cap * scale;
                ((cap / spacing).ceil().max(1.0) as usize, spacing)
            }
        };
        let adaptive = fixed.is_none() && params.nbar == 0.0;

        let x = norm * spacing;
        let mut order = 4;
        let mut term = 1.0;
        for k in 1..=MAX_ORDER {
            term *= x / k as f64;
            order = k;
            if term < SERIES_TOL && k >= 4 {
                break;
            }
        }

        let mut jets = Vec::new();
        let mut points = 0;
        let mut settled = false;
        let mut horizon = 0.0;
        let mut work: Vec<Vec<C64>> = Vec::with_capacity(order + 1);
        for k in 0..=max_steps {
            let residual = seeds[1..]
                .iter()
                .flat_map(|s| s.state.iter())
                .fold(0.0f64, |acc, z| acc.max(z.norm()));
            for seed in seeds.iter_mut() {
                work.clear();
                work.push(seed.state.clone());
                for j in 1..=order {
                    let next = seed.matrix.matvec(&work[j - 1]);
                    work.push(next);
                }
                for w in &work {
                    for pos in seed.readout {
                        jets.push(pos.map_or(C64::new(0.0, 0.0), |p| w[p]));
                    }
                }
                // advance: Σ h^j/j! Mʲ v
                let mut f = 1.0;
                for j in 1..=order {
                    f *= spacing / j as f64;
                    for (s, w) in seed.state.iter_mut().zip(&work[j]) {
                        *s += w * f;
                    }
                }
                if seed.state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("engine propagation"));
                }
            }
            points += 1;
            horizon = k as f64 * spacing;
            let envelope_small = residual < opts.settle_eps;
            if adaptive && k > 0 && envelope_small {
                settled = true;
                break;
            }
            if k == max_steps {
                settled = envelope_small;
            }
        }
        Ok(Self { basis, spacing, order, points, jets, horizon, settled, scale, block_dims })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Sizes of the reachable blocks for the four central seeds.
    pub fn block_dims(&self) -> [usize; 4] {
        self.block_dims
    }

    /// Central transfer matrix `T[r][n]`: coefficient of `μʳ` at time `t`
    /// given unit weight on `μⁿ` at t = 0.
    pub fn transfer(&self, t: f64) -> [[C64; 4]; 4] {
        let t = t.clamp(0.0, self.horizon);
        let k = ((t / self.spacing).round() as usize).min(self.points - 1);
        let h = t - k as f64 * self.spacing;
        let stride = (self.order + 1) * 4;
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for n in 0..4 {
            let base = (k * 4 + n) * stride;
            let mut f = 1.0;
            for j in 0..=self.order {
                if j > 0 {
                    f *= h / j as f64;
                }
                for r in 0..4 {
                    out[r][n] += self.jets[base + j * 4 + r] * f;
                }
            }
        }
        out
    }

    pub fn central_matrix_at(&self, rho0: &ComplexMat2, t: f64) -> ComplexMat2 {
        let tr = self.transfer(t);
        let c = self.basis.coefficients(rho0);
        let mut out = [C64::new(0.0, 0.0); 4];
        for r in 0..4 {
            for n in 0..4 {
                out[r] += tr[r][n] * c[n];
            }
        }
        central_matrix(&self.basis, out)
    }
}

fn bloch_of(m: &ComplexMat2) -> [f64; 3] {
    let coh = m[(0, 1)] + m[(1, 0)].conj();
    [coh.re, coh.im, (m[(1, 1)] - m[(0, 0)]).re]
}

impl CentralDynamics for EngineDynamics {
    fn map_at(&self, t: f64) -> BlochMap {
        let tr = self.transfer(t);
        let apply = |r: [f64; 3]| {
            let c = self.basis.coefficients(&bloch_to_matrix(r));
            let mut out = [C64::new(0.0, 0.0); 4];
            for a in 0..4 {
                for n in 0..4 {
                    out[a] += tr[a][n] * c[n];
                }
            }
            bloch_of(&central_matrix(&self.basis, out))
        };
        let offset = apply([0.0; 3]);
        let mut linear = [[0.0; 3]; 3];
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let col = apply(e);
            for row in 0..3 {
                linear[row][i] = col[row] - offset[row];
            }
        }
        BlochMap { linear, offset }
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn settled(&self) -> bool {
        self.settled
    }

    fn provenance(&self) -> Provenance {
        Provenance::Engine
    }

    fn time_scale(&self) -> f64 {
        self.scale
    }
}
