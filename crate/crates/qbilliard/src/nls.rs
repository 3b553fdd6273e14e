//! Split-step spectral solver for the effective equation of motion
//! −½∇²ψ + w(x,t)|ψ|²ψ = i ∂ψ/∂t on periodic grids in 1 and 2 dimensions.
//!
//! Strang splitting: half-step nonlinear phase, full kinetic step in the
//! spectral domain, half-step nonlinear phase. Both sub-steps are phase
//! multiplications for real w, so the discrete norm is conserved exactly up
//! to rounding; negative dt runs the evolution backwards.

use std::io::{Read as IoRead, Write as IoWrite};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SNAPSHOT_MAGIC: &[u8; 4] = b"NLS1";

/// Complex field sampled on a periodic grid; axis i covers
/// x = -L_i/2 + j·L_i/n_i for j = 0..n_i, row-major storage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveField {
    pub grid_shape: Vec<usize>,
    pub box_lengths: Vec<f64>,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(
        grid_shape: Vec<usize>,
        box_lengths: Vec<f64>,
        values: Vec<Complex64>,
        time: f64,
    ) -> Result<Self> {
        let field = Self {
            grid_shape,
            box_lengths,
            values,
            time,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.grid_shape.len();
        if dims != 1 && dims != 2 {
            return Err(Error::InvalidInput(format!(
                "field must be 1- or 2-dimensional, got {dims} axes"
            )));
        }
        if self.box_lengths.len() != dims {
            return Err(Error::InvalidInput(
                "box_lengths must match grid_shape in length".into(),
            ));
        }
        for &n in &self.grid_shape {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::InvalidInput(format!(
                    "grid axes must be powers of two >= 16, got {n}"
                )));
            }
        }
        if self.box_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput("box lengths must be positive".into()));
        }
        if self.values.len() != self.grid_shape.iter().product::<usize>() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match the grid shape",
                self.values.len()
            )));
        }
        if !self.time.is_finite()
            || self
                .values
                .iter()
                .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidInput("field values must be finite".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.grid_shape.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid_shape
            .iter()
            .zip(&self.box_lengths)
            .map(|(&n, &l)| l / n as f64)
            .product()
    }

    /// Coordinate of grid point j along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        let l = self.box_lengths[axis];
        -0.5 * l + l * j as f64 / self.grid_shape[axis] as f64
    }

    /// Builds a field by sampling `f` at grid coordinates.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(
        grid_shape: Vec<usize>,
        box_lengths: Vec<f64>,
        time: f64,
        f: F,
    ) -> Result<Self> {
        let dims = grid_shape.len();
        let total: usize = grid_shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut coords = vec![0.0; dims];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..dims).rev() {
                let n = grid_shape[axis];
                let j = rem % n;
                rem /= n;
                let l = box_lengths[axis];
                coords[axis] = -0.5 * l + l * j as f64 / n as f64;
            }
            values.push(f(&coords));
        }
        Self::new(grid_shape, box_lengths, values, time)
    }
}

/// Time modulation multiplying the spatial coefficient: w(x,t) = w(x)·m(t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum TimeModulation {
    /// m(t) = 1 + depth·cos(omega t).
    Cosine { depth: f64, omega: f64 },
}

impl TimeModulation {
    pub fn factor(&self, t: f64) -> f64 {
        match self {
            TimeModulation::Cosine { depth, omega } => 1.0 + depth * (omega * t).cos(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoefficientKind {
    Constant {
        w: f64,
    },
    /// w(x) = amplitude·e^{-‖x − center‖²/(2 width²)}.
    GaussianEnvelope {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// Grid-matched table of real coefficients, row-major.
    Tabulated {
        values: Vec<f64>,
    },
}

/// The nonlinear coefficient w(x,t); real-valued by construction (a complex
/// w would break norm conservation and is rejected at configuration time).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientField {
    #[serde(flatten)]
    pub kind: CoefficientKind,
    #[serde(default)]
    pub modulation: Option<TimeModulation>,
}

impl CoefficientField {
    pub fn constant(w: f64) -> Self {
        Self {
            kind: CoefficientKind::Constant { w },
            modulation: None,
        }
    }

    pub fn validate(&self, field: &WaveField) -> Result<()> {
        match &self.kind {
            CoefficientKind::Constant { w } => {
                if !w.is_finite() {
                    return Err(Error::InvalidInput("constant w must be finite".into()));
                }
            }
            CoefficientKind::GaussianEnvelope {
                amplitude,
                center,
                width,
            } => {
                if !amplitude.is_finite() || !(*width > 0.0) {
                    return Err(Error::InvalidInput(
                        "gaussian envelope needs finite amplitude and width > 0".into(),
                    ));
                }
                if center.len() != field.dims() {
                    return Err(Error::InvalidInput(format!(
                        "envelope center has {} entries for a {}-D field",
                        center.len(),
                        field.dims()
                    )));
                }
            }
            CoefficientKind::Tabulated { values } => {
                if values.len() != field.values.len() {
                    return Err(Error::InvalidInput(format!(
                        "tabulated coefficient has {} entries, grid has {}",
                        values.len(),
                        field.values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(
                        "tabulated coefficient must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Samples the spatial part on the field's grid (modulation excluded).
    fn spatial_samples(&self, field: &WaveField) -> Vec<f64> {
        match &self.kind {
            CoefficientKind::Constant { w } => vec![*w; field.values.len()],
            CoefficientKind::GaussianEnvelope {
                amplitude,
                center,
                width,
            } => {
                let dims = field.dims();
                let total = field.values.len();
                let mut out = Vec::with_capacity(total);
                for flat in 0..total {
                    let mut rem = flat;
                    let mut d2 = 0.0;
                    for axis in (0..dims).rev() {
                        let n = field.grid_shape[axis];
                        let j = rem % n;
                        rem /= n;
                        let dx = field.coordinate(axis, j) - center[axis];
                        d2 += dx * dx;
                    }
                    out.push(amplitude * (-0.5 * d2 / (width * width)).exp());
                }
                out
            }
            CoefficientKind::Tabulated { values } => values.clone(),
        }
    }

    pub fn max_abs(&self, field: &WaveField) -> f64 {
        let base = self
            .spatial_samples(field)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        match self.modulation {
            Some(TimeModulation::Cosine { depth, .. }) => base * (1.0 + depth.abs()),
            None => base,
        }
    }
}

/// Cached FFT plans and the squared-wavenumber table for one grid.
struct Spectral {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// k² at each grid point, row-major.
    k_squared: Vec<f64>,
}

impl Spectral {
    fn new(field: &WaveField) -> Self {
        let mut planner = FftPlanner::new();
        let shape = field.grid_shape.clone();
        let forward: Vec<_> = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        let axis_k: Vec<Vec<f64>> = shape
            .iter()
            .zip(&field.box_lengths)
            .map(|(&n, &l)| {
                (0..n)
                    .map(|j| {
                        let f = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                        2.0 * std::f64::consts::PI * f / l
                    })
                    .collect()
            })
            .collect();
        let total: usize = shape.iter().product();
        let mut k_squared = Vec::with_capacity(total);
        match shape.len() {
            1 => {
                for &k in &axis_k[0] {
                    k_squared.push(k * k);
                }
            }
            _ => {
                for &kx in &axis_k[0] {
                    for &ky in &axis_k[1] {
                        k_squared.push(kx * kx + ky * ky);
                    }
                }
            }
        }
        Self {
            shape,
            forward,
            inverse,
            k_squared,
        }
    }

    fn transform(&self, values: &mut [Complex64], forward: bool) {
        let plans = if forward { &self.forward } else { &self.inverse };
        match self.shape.len() {
            1 => plans[0].process(values),
            _ => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                for row in values.chunks_exact_mut(ny) {
                    plans[1].process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); nx];
                for j in 0..ny {
                    for i in 0..nx {
                        col[i] = values[i * ny + j];
                    }
                    plans[0].process(&mut col);
                    for i in 0..nx {
                        values[i * ny + j] = col[i];
                    }
                }
            }
        }
    }

    /// ψ̂ → ψ̂ e^{-i k² dt / 2}, in place via forward + inverse transform.
    fn kinetic(&self, values: &mut [Complex64], dt: f64) {
        self.transform(values, true);
        for (v, &k2) in values.iter_mut().zip(&self.k_squared) {
            *v *= Complex64::new(0.0, -0.5 * k2 * dt).exp();
        }
        self.transform(values, false);
        let scale = 1.0 / values.len() as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    /// Spectral gradient along `axis`.
    fn gradient(&self, values: &[Complex64], axis: usize, box_len: f64) -> Vec<Complex64> {
        let mut hat = values.to_vec();
        self.transform(&mut hat, true);
        let total = hat.len();
        match self.shape.len() {
            1 => {
                let n = self.shape[0];
                for (j, v) in hat.iter_mut().enumerate() {
                    let f = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                    // the Nyquist mode has no well-defined sign; zero it
                    let f = if j == n / 2 { 0.0 } else { f };
                    *v *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * f / box_len);
                }
            }
            _ => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                for flat in 0..total {
                    let j = if axis == 0 { flat / ny } else { flat % ny };
                    let n = if axis == 0 { nx } else { ny };
                    let f = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                    let f = if j == n / 2 { 0.0 } else { f };
                    hat[flat] *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * f / box_len);
                }
            }
        }
        self.transform(&mut hat, false);
        let scale = 1.0 / total as f64;
        for v in hat.iter_mut() {
            *v *= scale;
        }
        hat
    }
}

fn half_nonlinear(values: &mut [Complex64], w: &[f64], factor: f64, dt: f64) {
    for (v, &wi) in values.iter_mut().zip(w) {
        let phase = -wi * factor * v.norm_sqr() * dt * 0.5;
        *v *= Complex64::new(0.0, phase).exp();
    }
}

fn step_with(
    spectral: &Spectral,
    field: &mut WaveField,
    w_spatial: &[f64],
    w: &CoefficientField,
    dt: f64,
) -> Result<()> {
    let m1 = w
        .modulation
        .as_ref()
        .map_or(1.0, |m| m.factor(field.time));
    half_nonlinear(&mut field.values, w_spatial, m1, dt);
    spectral.kinetic(&mut field.values, dt);
    let m2 = w
        .modulation
        .as_ref()
        .map_or(1.0, |m| m.factor(field.time + dt));
    half_nonlinear(&mut field.values, w_spatial, m2, dt);
    field.time += dt;
    if field
        .values
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::BlowUp { time: field.time });
    }
    Ok(())
}

/// One Strang split step of size dt (negative dt steps backwards).
pub fn step(field: &WaveField, w: &CoefficientField, dt: f64) -> Result<WaveField> {
    field.validate()?;
    w.validate(field)?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::InvalidInput(format!(
            "step size must be finite and nonzero, got {dt}"
        )));
    }
    let spectral = Spectral::new(field);
    let w_spatial = w.spatial_samples(field);
    let mut next = field.clone();
    step_with(&spectral, &mut next, &w_spatial, w, dt)?;
    Ok(next)
}

/// Discrete L² norm (Σ|ψ|²·cell_volume)^{1/2}.
pub fn norm(field: &WaveField) -> f64 {
    let s: f64 = field.values.iter().map(|c| c.norm_sqr()).sum();
    (s * field.cell_volume()).sqrt()
}

/// Conserved functional Σ(½|∇ψ|² + ½ w|ψ|⁴)·cell_volume; defined only for
/// time-independent w.
pub fn energy(field: &WaveField, w: &CoefficientField) -> Result<f64> {
    field.validate()?;
    w.validate(field)?;
    if w.modulation.is_some() {
        return Err(Error::Precondition(
            "energy is only defined for a time-independent coefficient".into(),
        ));
    }
    let spectral = Spectral::new(field);
    let mut kinetic = 0.0;
    for axis in 0..field.dims() {
        let g = spectral.gradient(&field.values, axis, field.box_lengths[axis]);
        kinetic += g.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    let w_spatial = w.spatial_samples(field);
    let quartic: f64 = field
        .values
        .iter()
        .zip(&w_spatial)
        .map(|(c, &wi)| wi * c.norm_sqr().powi(2))
        .sum();
    Ok(0.5 * (kinetic + quartic) * field.cell_volume())
}

/// Sampled history of one evolution.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Absent when the coefficient is time-modulated.
    pub energies: Option<Vec<f64>>,
    /// Sampled fields, present when requested.
    pub fields: Option<Vec<WaveField>>,
    /// Set when the evolution blew up; the trajectory holds the samples
    /// collected up to that point.
    pub blow_up_time: Option<f64>,
    /// True when dt·max|w|·max|ψ₀|² exceeded the splitting heuristic 0.1.
    pub step_size_warning: bool,
}

impl Trajectory {
    /// Converts a blown-up trajectory into the corresponding error.
    pub fn into_result(self) -> Result<Trajectory> {
        match self.blow_up_time {
            Some(time) => Err(Error::BlowUp { time }),
            None => Ok(self),
        }
    }
}

/// Advances `initial` to t_final in uniform steps of dt, sampling every
/// `sample_every` steps (endpoints always sampled).
pub fn run(
    initial: &WaveField,
    w: &CoefficientField,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    store_fields: bool,
) -> Result<Trajectory> {
    initial.validate()?;
    w.validate(initial)?;
    if dt == 0.0 || !dt.is_finite() || sample_every == 0 {
        return Err(Error::InvalidInput(
            "run needs a finite nonzero dt and sample_every >= 1".into(),
        ));
    }
    let span = t_final - initial.time;
    let n_steps = (span / dt).round();
    if !(n_steps >= 1.0) || ((span - n_steps * dt) / dt).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "dt = {dt} does not evenly divide the horizon {span}"
        )));
    }
    let n_steps = n_steps as usize;

    let max_psi2 = initial.values.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let step_size_warning = dt.abs() * w.max_abs(initial) * max_psi2 > 0.1;

    let spectral = Spectral::new(initial);
    let w_spatial = w.spatial_samples(initial);
    let has_energy = w.modulation.is_none();

    let mut field = initial.clone();
    let mut times = vec![field.time];
    let mut norms = vec![norm(&field)];
    let mut energies = if has_energy {
        Some(vec![energy(&field, w)?])
    } else {
        None
    };
    let mut fields = if store_fields {
        Some(vec![field.clone()])
    } else {
        None
    };

    for i in 1..=n_steps {
        if let Err(Error::BlowUp { time }) = step_with(&spectral, &mut field, &w_spatial, w, dt) {
            return Ok(Trajectory {
                times,
                norms,
                energies,
                fields,
                blow_up_time: Some(time),
                step_size_warning,
            });
        }
        if i % sample_every == 0 || i == n_steps {
            times.push(field.time);
            norms.push(norm(&field));
            if let Some(e) = energies.as_mut() {
                e.push(energy(&field, w)?);
            }
            if let Some(f) = fields.as_mut() {
                f.push(field.clone());
            }
        }
    }
    Ok(Trajectory {
        times,
        norms,
        energies,
        fields,
        blow_up_time: None,
        step_size_warning,
    })
}

/// Binary snapshot: magic "NLS1", then little-endian u32 dims, u32 shape per
/// axis, f64 box length per axis, f64 time, and re/im f64 pairs row-major.
pub fn write_snapshot<W: IoWrite>(field: &WaveField, out: &mut W) -> Result<()> {
    field.validate()?;
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(field.dims() as u32).to_le_bytes())?;
    for &n in &field.grid_shape {
        out.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in &field.box_lengths {
        out.write_all(&l.to_le_bytes())?;
    }
    out.write_all(&field.time.to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: IoRead>(input: &mut R) -> Result<WaveField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::InvalidInput("bad snapshot magic".into()));
    }
    let mut u32_buf = [0u8; 4];
    let mut f64_buf = [0u8; 8];
    input.read_exact(&mut u32_buf)?;
    let dims = u32::from_le_bytes(u32_buf) as usize;
    if dims != 1 && dims != 2 {
        return Err(Error::InvalidInput(format!("bad snapshot dims {dims}")));
    }
    let mut grid_shape = Vec::with_capacity(dims);
    for _ in 0..dims {
        input.read_exact(&mut u32_buf)?;
        grid_shape.push(u32::from_le_bytes(u32_buf) as usize);
    }
    let mut box_lengths = Vec::with_capacity(dims);
    for _ in 0..dims {
        input.read_exact(&mut f64_buf)?;
        box_lengths.push(f64::from_le_bytes(f64_buf));
    }
    input.read_exact(&mut f64_buf)?;
    let time = f64::from_le_bytes(f64_buf);
    let total: usize = grid_shape.iter().product();
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        input.read_exact(&mut f64_buf)?;
        let re = f64::from_le_bytes(f64_buf);
        input.read_exact(&mut f64_buf)?;
        let im = f64::from_le_bytes(f64_buf);
        values.push(Complex64::new(re, im));
    }
    WaveField::new(grid_shape, box_lengths, values, time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plane_wave(n: usize, box_len: f64, mode: i32) -> WaveField {
        let k = 2.0 * std::f64::consts::PI * mode as f64 / box_len;
        WaveField::from_fn(vec![n], vec![box_len], 0.0, |x| {
            Complex64::new(0.0, k * x[0]).exp()
        })
        .unwrap()
    }

    fn soliton(n: usize, box_len: f64) -> WaveField {
        WaveField::from_fn(vec![n], vec![box_len], 0.0, |x| {
            Complex64::new(1.0 / x[0].cosh(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let v = vec![Complex64::new(0.0, 0.0); 12];
        assert!(WaveField::new(vec![12], vec![10.0], v.clone(), 0.0).is_err());
        let v = vec![Complex64::new(0.0, 0.0); 20];
        assert!(WaveField::new(vec![20], vec![10.0], v, 0.0).is_err());
        let v = vec![Complex64::new(0.0, 0.0); 16];
        assert!(WaveField::new(vec![16], vec![-1.0], v.clone(), 0.0).is_err());
        assert!(WaveField::new(vec![16], vec![10.0], v, 0.0).is_ok());
    }

    #[test]
    fn free_plane_wave_rotates_in_phase() {
        let box_len = 2.0 * std::f64::consts::PI;
        let field = plane_wave(64, box_len, 3);
        let w = CoefficientField::constant(0.0);
        let mut f = field.clone();
        for _ in 0..100 {
            f = step(&f, &w, 1e-2).unwrap();
        }
        let k = 3.0;
        let phase = Complex64::new(0.0, -0.5 * k * k * f.time).exp();
        for (v, v0) in f.values.iter().zip(&field.values) {
            assert!((v - v0 * phase).norm() < 1e-10);
        }
    }

    #[test]
    fn energy_of_unit_norm_plane_wave() {
        let box_len = 2.0 * std::f64::consts::PI;
        let mut field = plane_wave(64, box_len, 2);
        let scale = 1.0 / norm(&field);
        for v in field.values.iter_mut() {
            *v *= scale;
        }
        let w = CoefficientField::constant(0.0);
        let k = 2.0 * std::f64::consts::PI * 2.0 / box_len;
        assert_relative_eq!(energy(&field, &w).unwrap(), 0.5 * k * k, max_relative = 1e-12);
    }

    #[test]
    fn zero_field_norm_and_energy() {
        let f = WaveField::new(
            vec![16],
            vec![10.0],
            vec![Complex64::new(0.0, 0.0); 16],
            0.0,
        )
        .unwrap();
        assert_eq!(norm(&f), 0.0);
        assert_eq!(energy(&f, &CoefficientField::constant(-1.0)).unwrap(), 0.0);
    }

    #[test]
    fn soliton_matches_analytic_form() {
        let field = soliton(256, 40.0);
        let w = CoefficientField::constant(-1.0);
        let traj = run(&field, &w, 1.0, 1e-3, 1000, true).unwrap();
        assert!(traj.blow_up_time.is_none());
        let final_field = traj.fields.unwrap().pop().unwrap();
        let phase = Complex64::new(0.0, 0.5 * final_field.time).exp();
        let mut max_err = 0.0f64;
        for (j, v) in final_field.values.iter().enumerate() {
            let x = final_field.coordinate(0, j);
            let exact = phase / x.cosh();
            max_err = max_err.max((v - exact).norm());
        }
        assert!(max_err < 1e-6, "max error {max_err}");
    }

    #[test]
    fn soliton_energy_and_norm_drift() {
        let field = soliton(256, 40.0);
        let w = CoefficientField::constant(-1.0);
        let traj = run(&field, &w, 1.0, 1e-3, 100, false).unwrap();
        let n0 = traj.norms[0];
        for n in &traj.norms {
            assert!((n - n0).abs() / n0 < 1e-10);
        }
        let es = traj.energies.unwrap();
        let e0 = es[0];
        for e in &es {
            assert!((e - e0).abs() / e0.abs() < 1e-6);
        }
    }

    #[test]
    fn second_order_in_time() {
        let field = soliton(256, 40.0);
        let w = CoefficientField::constant(-1.0);
        let err_at = |dt: f64| {
            let traj = run(&field, &w, 0.5, dt, usize::MAX, true).unwrap();
            let f = traj.fields.unwrap().pop().unwrap();
            let phase = Complex64::new(0.0, 0.5 * f.time).exp();
            f.values
                .iter()
                .enumerate()
                .map(|(j, v)| (v - phase / f.coordinate(0, j).cosh()).norm())
                .fold(0.0f64, f64::max)
        };
        let e1 = err_at(4e-3);
        let e2 = err_at(2e-3);
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "measured order {order}");
    }

    #[test]
    fn time_reversal_recovers_initial_field() {
        let field = WaveField::from_fn(vec![128], vec![30.0], 0.0, |x| {
            Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)
        })
        .unwrap();
        let w = CoefficientField::constant(-1.0);
        let mut f = field.clone();
        for _ in 0..50 {
            f = step(&f, &w, 1e-2).unwrap();
        }
        for _ in 0..50 {
            f = step(&f, &w, -1e-2).unwrap();
        }
        let max_err = f
            .values
            .iter()
            .zip(&field.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-8, "max error {max_err}");
        assert!(f.time.abs() < 1e-12);
    }

    #[test]
    fn gaussian_envelope_conserves_norm() {
        let field = WaveField::from_fn(vec![128], vec![30.0], 0.0, |x| {
            Complex64::new((-0.3 * x[0] * x[0]).exp(), 0.0)
        })
        .unwrap();
        let w = CoefficientField {
            kind: CoefficientKind::GaussianEnvelope {
                amplitude: -2.0,
                center: vec![1.0],
                width: 3.0,
            },
            modulation: None,
        };
        let traj = run(&field, &w, 1.0, 1e-3, 100, false).unwrap();
        let n0 = traj.norms[0];
        for n in &traj.norms {
            assert!((n - n0).abs() / n0 < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_norm_conservation() {
        let field = WaveField::from_fn(vec![16, 32], vec![12.0, 12.0], 0.0, |x| {
            Complex64::new((-0.5 * (x[0] * x[0] + x[1] * x[1])).exp(), 0.1)
        })
        .unwrap();
        let w = CoefficientField::constant(-0.5);
        let traj = run(&field, &w, 0.1, 1e-3, 10, false).unwrap();
        let n0 = traj.norms[0];
        for n in &traj.norms {
            assert!((n - n0).abs() / n0 < 1e-10);
        }
        let es = traj.energies.unwrap();
        assert!((es[es.len() - 1] - es[0]).abs() / es[0].abs() < 1e-4);
    }

    #[test]
    fn two_dimensional_free_plane_wave() {
        let box_len = 2.0 * std::f64::consts::PI;
        let (kx, ky) = (1.0, 2.0);
        let field = WaveField::from_fn(
            vec![16, 16],
            vec![box_len, box_len],
            0.0,
            |x| Complex64::new(0.0, kx * x[0] + ky * x[1]).exp(),
        )
        .unwrap();
        let w = CoefficientField::constant(0.0);
        let mut f = field.clone();
        for _ in 0..20 {
            f = step(&f, &w, 5e-3).unwrap();
        }
        let phase = Complex64::new(0.0, -0.5 * (kx * kx + ky * ky) * f.time).exp();
        for (v, v0) in f.values.iter().zip(&field.values) {
            assert!((v - v0 * phase).norm() < 1e-10);
        }
    }

    #[test]
    fn modulated_coefficient_blocks_energy() {
        let field = soliton(64, 40.0);
        let w = CoefficientField {
            kind: CoefficientKind::Constant { w: -1.0 },
            modulation: Some(TimeModulation::Cosine {
                depth: 0.5,
                omega: 1.0,
            }),
        };
        assert!(matches!(
            energy(&field, &w),
            Err(Error::Precondition(_))
        ));
        let traj = run(&field, &w, 0.1, 1e-2, 1, false).unwrap();
        assert!(traj.energies.is_none());
        // norm is still conserved for real modulated w
        let n0 = traj.norms[0];
        for n in &traj.norms {
            assert!((n - n0).abs() / n0 < 1e-10);
        }
    }

    #[test]
    fn run_rejects_uneven_horizon() {
        let field = soliton(64, 40.0);
        let w = CoefficientField::constant(-1.0);
        assert!(run(&field, &w, 1.0, 0.3, 1, false).is_err());
        assert!(run(&field, &w, 1.0, 0.0, 1, false).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let field = WaveField::from_fn(vec![16, 16], vec![5.0, 7.0], 1.25, |x| {
            Complex64::new(x[0], x[1] * 0.5)
        })
        .unwrap();
        let mut buf = Vec::new();
        write_snapshot(&field, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"NLS1");
        let back = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(back.grid_shape, field.grid_shape);
        assert_eq!(back.box_lengths, field.box_lengths);
        assert_eq!(back.time, field.time);
        assert_eq!(back.values, field.values);
        assert!(read_snapshot(&mut &buf[1..]).is_err());
    }

    #[test]
    fn tabulated_coefficient_shape_mismatch() {
        let field = soliton(64, 40.0);
        let w = CoefficientField {
            kind: CoefficientKind::Tabulated {
                values: vec![0.0; 32],
            },
            modulation: None,
        };
        assert!(step(&field, &w, 1e-2).is_err());
    }
}
