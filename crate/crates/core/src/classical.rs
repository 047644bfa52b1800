//! Classical limit of the kicked top: a map on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::SphericalDirection;

const UNIT_TOL: f64 = 1e-12;
pub const MAX_CLOUD_POINTS: usize = 100_000_000;
pub const RNG_ALGORITHM: &str = "ChaCha8";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !r2.is_finite() || (r2.sqrt() - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotNormalized(r2.sqrt()));
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn direction(&self) -> SphericalDirection {
        SphericalDirection::from_axis(self.components())
    }

    /// Angle between two unit vectors, stable near 0 and pi.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let [a, b, c] = self.components();
        let [d, e, f] = other.components();
        let cross = ((b * f - c * e).powi(2) + (c * d - a * f).powi(2) + (a * e - b * d).powi(2)).sqrt();
        cross.atan2(a * d + b * e + c * f)
    }
}

impl From<SphericalDirection> for UnitVector3 {
    fn from(dir: SphericalDirection) -> Self {
        let [x, y, z] = dir.axis();
        Self { x, y, z }
    }
}

/// One period: a quarter turn about y, then a twist about z by `kappa * z`.
pub fn classical_step(r: UnitVector3, kappa: f64) -> UnitVector3 {
    let (x1, y1, z1) = (r.z, r.y, -r.x);
    let (s, c) = (kappa * z1).sin_cos();
    UnitVector3 {
        x: x1 * c - y1 * s,
        y: x1 * s + y1 * c,
        z: z1,
    }
}

/// Largest angle from `start` reached within `steps` periods.
pub fn max_angular_excursion(start: UnitVector3, kappa: f64, steps: usize) -> f64 {
    let mut r = start;
    let mut max = 0.0f64;
    for _ in 0..steps {
        r = classical_step(r, kappa);
        max = max.max(start.angle_to(&r));
    }
    max
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub traj: usize,
    pub step: usize,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicCloud {
    pub kappa: f64,
    pub n_traj: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub rng_algorithm: String,
    /// Ordered by trajectory, then step.
    pub points: Vec<CloudPoint>,
}

/// Uniform point on the sphere drawn from trajectory `traj`'s own stream.
pub fn sample_initial(seed: u64, traj: usize) -> UnitVector3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(traj as u64);
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    SphericalDirection::new(cos_theta.acos(), phi).into()
}

pub fn stroboscopic_map(kappa: f64, n_traj: usize, n_steps: usize, seed: u64) -> Result<StroboscopicCloud> {
    if !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be finite, got {kappa}")));
    }
    let total = n_traj.saturating_mul(n_steps + 1);
    if n_traj.saturating_mul(n_steps) > MAX_CLOUD_POINTS || total > MAX_CLOUD_POINTS + n_traj {
        return Err(Error::InvalidArgument(format!(
            "{n_traj} trajectories x {n_steps} steps exceeds {MAX_CLOUD_POINTS}"
        )));
    }
    let points = (0..n_traj)
        .into_par_iter()
        .flat_map_iter(|traj| {
            let mut r = sample_initial(seed, traj);
            (0..=n_steps).map(move |step| {
                if step > 0 {
                    r = classical_step(r, kappa);
                }
                let d = r.direction();
                CloudPoint {
                    traj,
                    step,
                    theta: d.theta(),
                    phi: d.phi(),
                }
            })
        })
        .collect();
    Ok(StroboscopicCloud {
        kappa,
        n_traj,
        n_steps,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        points,
    })
}
