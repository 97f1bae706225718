//! Geometric narrowband mmWave channel for a uniform linear array.
//!
//! Each user column is a sum of `L_k` plane-wave paths,
//! `h_k = sqrt(N_r / L_k) * sum_l g_lk * a(phi_lk)`, with complex gains
//! `g ~ CN(0, 1)`, angles of arrival uniform on `[-pi/2, pi/2]` and the path
//! count `L_k = max(1, Poisson(lambda_L))`. Large-scale fading is assumed to
//! be fully compensated by power control, so the SNR is the only scale knob.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMat, CVec};

/// Uniform linear array: antenna count and spacing in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_antennas: usize,
    spacing_ratio: f64,
}

impl ArrayGeometry {
    /// Half-wavelength array.
    pub fn half_wavelength(n_antennas: usize) -> Result<Self> {
        Self::new(n_antennas, 0.5)
    }

    pub fn new(n_antennas: usize, spacing_ratio: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::Domain("array needs at least one antenna".into()));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio <= 0.5) {
            return Err(Error::Domain(format!(
                "antenna spacing ratio {spacing_ratio} outside (0, 1/2]"
            )));
        }
        Ok(Self {
            n_antennas,
            spacing_ratio,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }
}

/// Unit-norm array response `a(theta)` indexed by spatial angle.
///
/// Entry `m` is `exp(-j*pi*m*theta) / sqrt(N_r)`.
pub fn steering_vector(geometry: &ArrayGeometry, spatial_angle: f64) -> Result<CVec> {
    if spatial_angle.is_nan() || spatial_angle.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "spatial angle {spatial_angle} outside [-1, 1]"
        )));
    }
    Ok(steering_vector_unchecked(
        geometry.n_antennas,
        spatial_angle,
    ))
}

pub(crate) fn steering_vector_unchecked(n: usize, spatial_angle: f64) -> CVec {
    let scale = 1.0 / (n as f64).sqrt();
    CVec::from_iterator(
        n,
        (0..n).map(|m| Complex64::from_polar(scale, -PI * m as f64 * spatial_angle)),
    )
}

/// Maps a physical angle of arrival (radians) to the spatial angle
/// `2 (d/lambda) sin(phi)`.
pub fn spatial_from_physical(geometry: &ArrayGeometry, physical: f64) -> f64 {
    debug_assert!(physical.abs() <= FRAC_PI_2 + 1e-12);
    2.0 * geometry.spacing_ratio * physical.sin()
}

/// `max(1, Poisson(mean_paths))`.
pub fn draw_path_count<R: Rng + ?Sized>(mean_paths: f64, rng: &mut R) -> usize {
    let poisson = Poisson::new(mean_paths).expect("mean_paths must be positive and finite");
    let draw: f64 = poisson.sample(rng);
    floor_path_count(draw as u64)
}

#[inline]
fn floor_path_count(poisson_draw: u64) -> usize {
    poisson_draw.max(1) as usize
}

/// Per-user propagation paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub gains: Vec<Complex64>,
    /// Physical angles of arrival in radians.
    pub aoas: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<Complex64>, aoas: Vec<f64>) -> Result<Self> {
        if gains.is_empty() || gains.len() != aoas.len() {
            return Err(Error::Contract(format!(
                "path set needs matching nonempty gains/aoas, got {} and {}",
                gains.len(),
                aoas.len()
            )));
        }
        Ok(Self { gains, aoas })
    }

    pub fn count(&self) -> usize {
        self.gains.len()
    }

    /// `sqrt(N_r / L) * sum_l g_l a(phi_l)`.
    pub fn column(&self, geometry: &ArrayGeometry) -> CVec {
        let n = geometry.n_antennas;
        let mut col = CVec::zeros(n);
        for (g, &phi) in self.gains.iter().zip(&self.aoas) {
            let a = steering_vector_unchecked(n, spatial_from_physical(geometry, phi));
            col.axpy(*g, &a, Complex64::new(1.0, 0.0));
        }
        col * Complex64::new((n as f64 / self.count() as f64).sqrt(), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    h: CMat,
    paths: Vec<PathSet>,
    geometry: ArrayGeometry,
}

impl ChannelMatrix {
    /// Assembles the channel from per-user paths.
    pub fn from_paths(geometry: ArrayGeometry, paths: Vec<PathSet>) -> Self {
        let mut h = CMat::zeros(geometry.n_antennas, paths.len());
        for (k, p) in paths.iter().enumerate() {
            h.set_column(k, &p.column(&geometry));
        }
        Self { h, paths, geometry }
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    pub fn paths(&self) -> &[PathSet] {
        &self.paths
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn n_users(&self) -> usize {
        self.h.ncols()
    }

    /// Rebuilds `H` from the stored path metadata.
    pub fn reconstruct(&self) -> CMat {
        Self::from_paths(self.geometry, self.paths.clone()).h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub n_users: usize,
    pub mean_paths: f64,
    pub geometry: ArrayGeometry,
}

impl ChannelParams {
    pub fn new(n_users: usize, mean_paths: f64, geometry: ArrayGeometry) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::Domain("need at least one user".into()));
        }
        if !(mean_paths > 0.0 && mean_paths.is_finite()) {
            return Err(Error::Domain(format!(
                "mean path count {mean_paths} must be positive"
            )));
        }
        Ok(Self {
            n_users,
            mean_paths,
            geometry,
        })
    }
}

/// Draws one channel realization. Users are generated in order; for each
/// user the path count, then per path the gain and the angle.
pub fn generate_channel<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> ChannelMatrix {
    let aoa = Uniform::new_inclusive(-FRAC_PI_2, FRAC_PI_2).expect("valid range");
    let paths = (0..params.n_users)
        .map(|_| {
            let count = draw_path_count(params.mean_paths, rng);
            let mut gains = Vec::with_capacity(count);
            let mut aoas = Vec::with_capacity(count);
            for _ in 0..count {
                gains.push(complex_gaussian(rng));
                aoas.push(aoa.sample(rng));
            }
            PathSet { gains, aoas }
        })
        .collect();
    ChannelMatrix::from_paths(params.geometry, paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn broadside_steering_vector() {
        let g = ArrayGeometry::half_wavelength(4).unwrap();
        let a = steering_vector(&g, 0.0).unwrap();
        for z in a.iter() {
            assert!(close(*z, Complex64::new(0.5, 0.0), 1e-15));
        }
    }

    #[test]
    fn endfire_two_element() {
        let g = ArrayGeometry::half_wavelength(2).unwrap();
        let a = steering_vector(&g, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(a[0], Complex64::new(s, 0.0), 1e-15));
        assert!(close(a[1], Complex64::new(-s, 0.0), 1e-15));
    }

    #[test]
    fn grid_spaced_vectors_are_orthogonal() {
        let g = ArrayGeometry::half_wavelength(8).unwrap();
        let a = steering_vector(&g, 0.25).unwrap();
        for k in 1..8 {
            // wrap into [-1, 1]; the response is 2-periodic in the spatial angle
            let mut t = 0.25 + 2.0 / 8.0 * k as f64;
            if t > 1.0 {
                t -= 2.0;
            }
            let b = steering_vector(&g, t).unwrap();
            assert!(a.dotc(&b).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn out_of_range_angle_is_rejected() {
        let g = ArrayGeometry::half_wavelength(4).unwrap();
        assert!(matches!(steering_vector(&g, 1.01), Err(Error::Domain(_))));
        assert!(matches!(
            steering_vector(&g, f64::NAN),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::new(0, 0.5).is_err());
        assert!(ArrayGeometry::new(4, 0.6).is_err());
        assert!(ArrayGeometry::new(4, 0.0).is_err());
        assert!(ArrayGeometry::new(4, 0.25).is_ok());
    }

    #[test]
    fn spatial_angle_mapping() {
        let g = ArrayGeometry::half_wavelength(4).unwrap();
        assert_eq!(spatial_from_physical(&g, 0.0), 0.0);
        assert!((spatial_from_physical(&g, FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((spatial_from_physical(&g, PI / 6.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn path_count_floor() {
        assert_eq!(floor_path_count(0), 1);
        assert_eq!(floor_path_count(3), 3);
    }

    #[test]
    fn single_path_broadside_column() {
        let g = ArrayGeometry::half_wavelength(6).unwrap();
        let p = PathSet::new(vec![Complex64::new(1.0, 0.0)], vec![0.0]).unwrap();
        let ch = ChannelMatrix::from_paths(g, vec![p]);
        for z in ch.matrix().column(0).iter() {
            assert!(close(*z, Complex64::new(1.0, 0.0), 1e-14));
        }
        assert!((ch.matrix().column(0).norm_squared() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn path_set_shape_checked() {
        assert!(PathSet::new(vec![], vec![]).is_err());
        assert!(PathSet::new(vec![Complex64::new(1.0, 0.0)], vec![0.0, 0.1]).is_err());
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let g = ArrayGeometry::half_wavelength(16).unwrap();
        let params = ChannelParams::new(3, 3.0, g).unwrap();
        let a = generate_channel(&params, &mut ChaCha8Rng::seed_from_u64(99));
        let b = generate_channel(&params, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
        let c = generate_channel(&params, &mut ChaCha8Rng::seed_from_u64(100));
        assert_ne!(a, c);
    }

    #[test]
    fn reconstruction_round_trip() {
        let g = ArrayGeometry::half_wavelength(12).unwrap();
        let params = ChannelParams::new(4, 2.5, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ch = generate_channel(&params, &mut rng);
            let diff = (ch.reconstruct() - ch.matrix()).norm();
            assert!(diff <= 1e-12 * ch.matrix().norm());
            for p in ch.paths() {
                assert!(p.count() >= 1);
                assert!(p.aoas.iter().all(|phi| phi.abs() <= FRAC_PI_2));
            }
        }
    }
}
