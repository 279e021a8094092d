//! Reproducible Monte Carlo integration.
//!
//! Sample `i` is drawn from its own ChaCha8 stream `i` under the run seed, so
//! the sample set depends only on `(seed, sample_count)`. Chunks are
//! contiguous index ranges evaluated in parallel; their partial moments are
//! merged in chunk order. Results are therefore bit-identical for a fixed
//! `(seed, chunk_count)` whatever the thread count, and changing the chunk
//! count only reorders floating-point additions.
//!
//! Integrands and samplers are shared across worker threads and must be
//! `Sync`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{draw_ball_coords, GroupPoint, HeisenbergSpace};
use crate::numerics::IntegralResult;

/// Independent generator for sample `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCSpec {
    pub sample_count: usize,
    pub seed: u64,
    pub chunk_count: usize,
}

impl MCSpec {
    pub fn new(sample_count: usize, seed: u64, chunk_count: usize) -> Result<Self> {
        let spec = Self {
            sample_count,
            seed,
            chunk_count,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 || self.chunk_count == 0 {
            return Err(Error::invalid(
                "sample_count and chunk_count must be at least 1",
            ));
        }
        if self.sample_count < self.chunk_count {
            return Err(Error::invalid(format!(
                "sample_count {} is smaller than chunk_count {}",
                self.sample_count, self.chunk_count
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self.chunk_count = self.chunk_count.min(sample_count).max(1);
        self
    }
}

impl Default for MCSpec {
    fn default() -> Self {
        Self {
            sample_count: 100_000,
            seed: 0x5eed,
            chunk_count: 16,
        }
    }
}

/// A region of known measure with a uniform sampler.
pub trait DomainSampler: Sync {
    type Point;

    /// Lebesgue measure of the sampled region.
    fn measure(&self) -> f64;

    fn draw(&self, rng: &mut ChaCha8Rng) -> Self::Point;
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSampler {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSampler {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty()
            || lower.len() != upper.len()
            || lower.iter().zip(&upper).any(|(a, b)| !(b > a))
        {
            return Err(Error::invalid(
                "box bounds must be non-empty with lower < upper",
            ));
        }
        Ok(Self { lower, upper })
    }

    /// Bounding box `[-1, 1]^{2n+1}` of the unit Korányi ball.
    pub fn koranyi_bounding_box(space: &HeisenbergSpace) -> Self {
        Self {
            lower: vec![-1.0; space.dim()],
            upper: vec![1.0; space.dim()],
        }
    }
}

impl DomainSampler for BoxSampler {
    type Point = Vec<f64>;

    fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        use rand::Rng;
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| a + (b - a) * rng.gen::<f64>())
            .collect()
    }
}

/// Uniform points of the Korányi ball `B(0, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoranyiBallSampler {
    space: HeisenbergSpace,
    radius: f64,
}

impl KoranyiBallSampler {
    pub fn new(space: HeisenbergSpace, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "ball radius must be finite and positive, got {radius}"
            )));
        }
        Ok(Self { space, radius })
    }
}

impl DomainSampler for KoranyiBallSampler {
    type Point = GroupPoint;

    fn measure(&self) -> f64 {
        self.space.ball_volume() * self.radius.powi(self.space.q() as i32)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GroupPoint {
        let unit = GroupPoint::new(draw_ball_coords(self.space.dim(), rng)).expect("odd dimension");
        unit.dilate_unchecked(self.radius)
    }
}

/// Tuples of independent uniform points from balls `B(0, r_1) x ... x B(0, r_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProductSampler {
    balls: Vec<KoranyiBallSampler>,
}

impl BallProductSampler {
    pub fn new(space: HeisenbergSpace, radii: &[f64]) -> Result<Self> {
        let balls = radii
            .iter()
            .map(|&r| KoranyiBallSampler::new(space, r))
            .collect::<Result<Vec<_>>>()?;
        if balls.is_empty() {
            return Err(Error::invalid("need at least one ball"));
        }
        Ok(Self { balls })
    }
}

impl DomainSampler for BallProductSampler {
    type Point = Vec<GroupPoint>;

    fn measure(&self) -> f64 {
        self.balls.iter().map(|b| b.measure()).product()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<GroupPoint> {
        self.balls.iter().map(|b| b.draw(rng)).collect()
    }
}

/// Running count / mean / sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Monte Carlo estimate of `int f` over the sampler's region, with its
/// standard error.
pub fn mc_integrate<S, F>(f: F, sampler: &S, spec: &MCSpec) -> Result<IntegralResult>
where
    S: DomainSampler,
    F: Fn(&S::Point) -> f64 + Sync,
{
    spec.validate()?;
    let n = spec.sample_count as u64;
    let chunks = spec.chunk_count as u64;
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (start, end) = (c * n / chunks, (c + 1) * n / chunks);
            let mut m = Moments::default();
            for i in start..end {
                let mut rng = substream(spec.seed, i);
                let point = sampler.draw(&mut rng);
                m.push(f(&point));
            }
            m
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    if !total.mean.is_finite() {
        return Err(Error::domain(
            "Monte Carlo integrand produced non-finite values",
        ));
    }
    let measure = sampler.measure();
    let std_error = if total.count > 1.0 {
        (total.m2 / (total.count - 1.0) / total.count).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(IntegralResult {
        value: measure * total.mean,
        error_estimate: measure * std_error,
        evaluations: spec.sample_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_integrand_is_exactly_zero() {
        let s = HeisenbergSpace::new(1).unwrap();
        let ball = KoranyiBallSampler::new(s, 1.0).unwrap();
        let r = mc_integrate(|_| 0.0, &ball, &MCSpec::new(1000, 1, 4).unwrap()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(MCSpec::new(0, 1, 1).is_err());
        assert!(MCSpec::new(3, 1, 4).is_err());
        assert!(MCSpec::new(4, 1, 4).is_ok());
    }

    #[test]
    fn box_measure_and_uniform_mean() {
        let b = BoxSampler::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.measure(), 4.0);
        // int x dx dy over [0,2]x[-1,1] = 4
        let r = mc_integrate(|p| p[0], &b, &MCSpec::new(200_000, 9, 8).unwrap()).unwrap();
        assert!((r.value - 4.0).abs() < 4.0 * r.error_estimate);
        assert!(BoxSampler::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn bitwise_reproducible_across_thread_pools() {
        let b = BoxSampler::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let spec = MCSpec::new(50_000, 77, 12).unwrap();
        let f = |p: &Vec<f64>| (p[0] * p[1]).sin() + p[2];
        let a = mc_integrate(f, &b, &spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| mc_integrate(f, &b, &spec).unwrap());
        assert_eq!(a.value.to_bits(), c.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), c.error_estimate.to_bits());
    }

    #[test]
    fn chunking_only_reorders_sums() {
        let b = BoxSampler::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let f = |p: &Vec<f64>| (p[0] + 2.0 * p[1]).exp();
        let a = mc_integrate(f, &b, &MCSpec::new(40_000, 5, 1).unwrap()).unwrap();
        let c = mc_integrate(f, &b, &MCSpec::new(40_000, 5, 13).unwrap()).unwrap();
        assert!(((a.value - c.value) / a.value).abs() <= 1e-12);
        assert!(((a.error_estimate - c.error_estimate) / a.error_estimate).abs() <= 1e-9);
    }
}
