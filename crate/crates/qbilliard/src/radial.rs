//! Discretization of the momentum-space integral operators for rotationally
//! symmetric states. States are complex functions of |k| on a radial grid;
//! the 4-dimensional (p, q) integral is reduced via p± = (p ± q)/√2 to a
//! 2-D radial quadrature times one angular integral between p₊ and p₋.
//!
//! With a drift-free Gaussian packet the closed-form kernel reads
//!   X(k'; p, q) = ξ e^{-a k'²} e^{-2a p₊²} I₀(2√2 a p₋ k')
//! so only the angular dependence of the state factors remains under the
//! φ integral.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{xi, GaussianPacket, KernelParams};
use crate::quad::gauss_legendre_on;
use crate::specfun;

const ZERO_SENTINEL: u32 = u32::MAX;

/// Precomputed linear-interpolation stencil for one sample radius.
#[derive(Clone, Copy)]
struct Stencil {
    idx: u32,
    w: f64,
}

pub(crate) struct RadialMap {
    grid: Vec<f64>,
    xi: Complex64,
    n_minus: usize,
    n_phi: usize,
    /// w₊ w₋ p₊ p₋ e^{-2a p₊²} (2π/n_phi) per (i, j), flattened j-major per i.
    outer: Vec<f64>,
    /// Interpolation stencils for r_p and r_q per (i, j, φ).
    sten_p: Vec<Stencil>,
    sten_q: Vec<Stencil>,
    /// I₀(2√2 a p₋ k) per (k index, j).
    i0_k: Vec<f64>,
    /// e^{-a k²} per grid point.
    env_k: Vec<f64>,
}

impl RadialMap {
    pub fn new(grid: &[f64], packet: &GaussianPacket, params: &KernelParams) -> Result<Self> {
        Self::with_resolution(grid, packet, params, 48, 48, 32)
    }

    pub fn with_resolution(
        grid: &[f64],
        packet: &GaussianPacket,
        params: &KernelParams,
        n_plus: usize,
        n_minus: usize,
        n_phi: usize,
    ) -> Result<Self> {
        if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "radial grid must be strictly increasing and start above 0".into(),
            ));
        }
        if packet.b != [0.0, 0.0] {
            return Err(Error::Precondition(
                "radial reduction requires a drift-free packet (b = 0)".into(),
            ));
        }
        let a = packet.a;
        let k_max = *grid.last().unwrap();
        // States interpolate to zero beyond the grid; r = (p₊ + p₋)/√2 caps
        // the support, and the kernel envelope caps p₊ on its own.
        let u_plus = (16.0 / a).sqrt().min(std::f64::consts::SQRT_2 * k_max);
        let u_minus = std::f64::consts::SQRT_2 * k_max;
        let (xp, wp) = gauss_legendre_on(n_plus, 0.0, u_plus);
        let (xm, wm) = gauss_legendre_on(n_minus, 0.0, u_minus);

        let phi_w = 2.0 * std::f64::consts::PI / n_phi as f64;
        let cos_phi: Vec<f64> = (0..n_phi)
            .map(|t| (phi_w * t as f64).cos())
            .collect();

        let stencil_for = |r: f64| -> Stencil {
            if r >= k_max {
                return Stencil {
                    idx: ZERO_SENTINEL,
                    w: 0.0,
                };
            }
            if r <= grid[0] {
                return Stencil { idx: 0, w: 0.0 };
            }
            let i = grid.partition_point(|&g| g <= r) - 1;
            let w = (r - grid[i]) / (grid[i + 1] - grid[i]);
            Stencil { idx: i as u32, w }
        };

        let mut outer = Vec::with_capacity(n_plus * n_minus);
        let mut sten_p = Vec::with_capacity(n_plus * n_minus * n_phi);
        let mut sten_q = Vec::with_capacity(n_plus * n_minus * n_phi);
        for i in 0..n_plus {
            for j in 0..n_minus {
                let (pp, pm) = (xp[i], xm[j]);
                outer.push(wp[i] * wm[j] * pp * pm * (-2.0 * a * pp * pp).exp() * phi_w);
                for &c in &cos_phi {
                    let rp = (0.5 * (pp * pp + pm * pm + 2.0 * pp * pm * c)).max(0.0).sqrt();
                    let rq = (0.5 * (pp * pp + pm * pm - 2.0 * pp * pm * c)).max(0.0).sqrt();
                    sten_p.push(stencil_for(rp));
                    sten_q.push(stencil_for(rq));
                }
            }
        }

        let mut i0_k = Vec::with_capacity(grid.len() * n_minus);
        for &k in grid {
            let arg_scale = 2.0 * std::f64::consts::SQRT_2 * a * k;
            for &pm in &xm {
                i0_k.push(specfun::bessel_i0(arg_scale * pm)?);
            }
        }
        let env_k = grid.iter().map(|&k| (-a * k * k).exp()).collect();

        Ok(Self {
            grid: grid.to_vec(),
            xi: xi(packet, params)?,
            n_minus,
            n_phi,
            outer,
            sten_p,
            sten_q,
            i0_k,
            env_k,
        })
    }

    #[inline]
    fn sample(values: &[Complex64], s: Stencil) -> Complex64 {
        if s.idx == ZERO_SENTINEL {
            return Complex64::new(0.0, 0.0);
        }
        let i = s.idx as usize;
        if s.w == 0.0 {
            values[i]
        } else {
            values[i] * (1.0 - s.w) + values[i + 1] * s.w
        }
    }

    /// F[c](k') = ∫ c*(p) X(k'; p, q) c(q) d²p d²q on the radial grid.
    pub fn apply_quadratic(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid.len());
        self.contract_with(values, values, |up, uq| up.conj() * uq)
    }

    /// (M̂ δc)(k') = ∫ X(k'; p, q) (ζ(p) δc(q) + ζ(q) δc(p)) d²p d²q.
    pub fn apply_linearized(&self, zeta: &[Complex64], delta: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(zeta.len(), self.grid.len());
        assert_eq!(delta.len(), self.grid.len());
        self.contract_pair(zeta, delta)
    }

    fn contract_with<G: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        u: &[Complex64],
        v: &[Complex64],
        pair: G,
    ) -> Vec<Complex64> {
        let n_minus = self.n_minus;
        let n_cells = self.outer.len();
        let mut acc_j = vec![Complex64::new(0.0, 0.0); n_minus];
        for cell in 0..n_cells {
            let base = cell * self.n_phi;
            let mut g = Complex64::new(0.0, 0.0);
            for t in 0..self.n_phi {
                let up = Self::sample(u, self.sten_p[base + t]);
                let uq = Self::sample(v, self.sten_q[base + t]);
                g += pair(up, uq);
            }
            acc_j[cell % n_minus] += g * self.outer[cell];
        }
        self.finish(&acc_j)
    }

    fn contract_pair(&self, zeta: &[Complex64], delta: &[Complex64]) -> Vec<Complex64> {
        let n_minus = self.n_minus;
        let n_cells = self.outer.len();
        let mut acc_j = vec![Complex64::new(0.0, 0.0); n_minus];
        for cell in 0..n_cells {
            let base = cell * self.n_phi;
            let mut g = Complex64::new(0.0, 0.0);
            for t in 0..self.n_phi {
                let sp = self.sten_p[base + t];
                let sq = self.sten_q[base + t];
                g += Self::sample(zeta, sp) * Self::sample(delta, sq)
                    + Self::sample(zeta, sq) * Self::sample(delta, sp);
            }
            acc_j[cell % n_minus] += g * self.outer[cell];
        }
        self.finish(&acc_j)
    }

    fn finish(&self, acc_j: &[Complex64]) -> Vec<Complex64> {
        let n_minus = self.n_minus;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        // d²p d²q = 2π p₊p₋ dp₊ dp₋ dφ after integrating the free angle
        let free_angle = 2.0 * std::f64::consts::PI;
        for (ki, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &aj) in acc_j.iter().enumerate() {
                s += aj * self.i0_k[ki * n_minus + j];
            }
            *o = self.xi * (self.env_k[ki] * free_angle) * s;
        }
        out
    }
}
