//! Dense parameter/gradient containers and a deterministic RNG.
//!
//! Everything here is a plain value: no interior mutability, no global
//! state, no OS entropy. Two runs that start from the same seed produce
//! bitwise-identical streams on every platform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A flat `f64` parameter or gradient vector with shape metadata.
///
/// Shapes are bookkeeping only; all arithmetic treats the data as flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    data: Vec<f64>,
    shape: Vec<usize>,
}

impl ParamVector {
    /// Builds a vector with explicit shape metadata.
    ///
    /// The product of `shape` must equal `data.len()` and every shape
    /// entry must be at least 1.
    pub fn new(data: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "shape entries must be >= 1, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::InvalidConfig(format!(
                "shape {shape:?} implies {expected} entries but data has {}",
                data.len()
            )));
        }
        Ok(Self { data, shape })
    }

    /// Builds a rank-1 vector; shape is `[data.len()]`.
    pub fn flat(data: Vec<f64>) -> Self {
        let shape = vec![data.len()];
        Self { data, shape }
    }

    /// All-zero vector of the given shape.
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self {
            data: vec![0.0; len],
            shape: shape.to_vec(),
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape == other.shape
    }

    /// True when every entry is finite (no NaN, no infinity).
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Euclidean norm `sqrt(sum v_i^2)`.
    ///
    /// Errors on an empty vector.
    pub fn l2_norm(&self) -> Result<f64> {
        if self.data.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(self.data.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Scales every entry in place.
    pub fn scale_in_place(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }
}

/// Computes `a * x + y` elementwise.
///
/// Errors when `x` and `y` have different shapes; the error names both.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    if !x.same_shape(y) {
        return Err(Error::ShapeMismatch {
            left: x.shape.clone(),
            right: y.shape.clone(),
        });
    }
    let data = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(xi, yi)| a * xi + yi)
        .collect();
    Ok(ParamVector {
        data,
        shape: x.shape.clone(),
    })
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Counter-based pseudo-random generator (splitmix64).
///
/// The state is a counter advanced by a fixed odd increment and fed
/// through a bit-mixing finalizer, so the output stream is a pure
/// function of `(seed, draw index)` and identical on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rng {
    seed: u64,
    counter: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child generator for a named stream.
    ///
    /// Children for distinct labels draw from unrelated sequences, so
    /// e.g. batch shuffling never perturbs weight initialization.
    pub fn derive(&self, label: &str) -> Rng {
        Rng::new(mix64(self.seed.wrapping_add(fnv1a64(label.as_bytes()))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(
            self.seed
                .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform index in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index requires n > 0");
        let n = n as u64;
        let zone = n * (u64::MAX / n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal draw via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1], keeps ln finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }
}

/// Draws `n` uniform values in `[lo, hi)` as a flat vector.
///
/// Errors when `lo >= hi` or `n == 0`.
pub fn rng_uniform(rng: &mut Rng, lo: f64, hi: f64, n: usize) -> Result<ParamVector> {
    if !(lo < hi) {
        return Err(Error::InvalidConfig(format!(
            "uniform range requires lo < hi, got [{lo}, {hi})"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig(
            "uniform draw count must be >= 1".into(),
        ));
    }
    let width = hi - lo;
    let data = (0..n)
        .map(|_| {
            let x = lo + rng.next_f64() * width;
            // f64 rounding can land exactly on hi for extreme ranges
            if x < hi {
                x
            } else {
                f64::from_bits(hi.to_bits() - 1)
            }
        })
        .collect();
    Ok(ParamVector::flat(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // proptest's prelude also globs a `Rng` trait; ours wins here
    use super::Rng;

    #[test]
    fn l2_norm_examples() {
        let v = ParamVector::flat(vec![3.0, 4.0]);
        assert_eq!(v.l2_norm().unwrap(), 5.0);

        let z = ParamVector::flat(vec![0.0, 0.0, 0.0]);
        assert_eq!(z.l2_norm().unwrap(), 0.0);

        let ones = ParamVector::flat(vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(ones.l2_norm().unwrap(), 2.0);
    }

    #[test]
    fn l2_norm_empty_is_error() {
        let e = ParamVector::flat(vec![]).l2_norm().unwrap_err();
        assert_eq!(e.to_string(), "empty parameter vector");
    }

    #[test]
    fn axpy_examples() {
        let x = ParamVector::flat(vec![5.0, 5.0]);
        let y = ParamVector::flat(vec![1.0, 2.0]);
        assert_eq!(axpy(0.0, &x, &y).unwrap().data(), &[1.0, 2.0]);

        let x = ParamVector::flat(vec![1.0, 1.0]);
        let y = ParamVector::flat(vec![0.0, 0.0]);
        assert_eq!(axpy(1.0, &x, &y).unwrap().data(), &[1.0, 1.0]);

        let x = ParamVector::flat(vec![1.0, 3.0]);
        let y = ParamVector::flat(vec![4.0, 4.0]);
        assert_eq!(axpy(-2.0, &x, &y).unwrap().data(), &[2.0, -2.0]);
    }

    #[test]
    fn axpy_shape_mismatch_names_both_shapes() {
        let x = ParamVector::new(vec![0.0; 6], vec![2, 3]).unwrap();
        let y = ParamVector::flat(vec![0.0; 6]);
        let msg = axpy(1.0, &x, &y).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[6]"), "{msg}");
    }

    #[test]
    fn shape_must_match_data_len() {
        assert!(ParamVector::new(vec![1.0, 2.0], vec![3]).is_err());
        assert!(ParamVector::new(vec![1.0, 2.0], vec![2, 0]).is_err());
        assert!(ParamVector::new(vec![1.0, 2.0], vec![2, 1]).is_ok());
    }

    #[test]
    fn rng_same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        let va = rng_uniform(&mut a, 0.0, 1.0, 3).unwrap();
        let vb = rng_uniform(&mut b, 0.0, 1.0, 3).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn rng_different_seeds_differ() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(43);
        let va = rng_uniform(&mut a, 0.0, 1.0, 100).unwrap();
        let vb = rng_uniform(&mut b, 0.0, 1.0, 100).unwrap();
        assert_ne!(va, vb);
    }

    #[test]
    fn rng_uniform_respects_range() {
        let mut rng = Rng::new(7);
        let v = rng_uniform(&mut rng, 0.0, 1.0, 10_000).unwrap();
        assert!(v.data().iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn rng_uniform_rejects_bad_range() {
        let mut rng = Rng::new(1);
        assert!(rng_uniform(&mut rng, 1.0, 1.0, 3).is_err());
        assert!(rng_uniform(&mut rng, 2.0, 1.0, 3).is_err());
        assert!(rng_uniform(&mut rng, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn derive_labels_are_independent() {
        let root = Rng::new(42);
        let mut init = root.derive("init");
        let mut shuffle = root.derive("shuffle");
        let first_init = init.next_u64();
        assert_ne!(first_init, shuffle.next_u64());
        // re-deriving the same label replays the same stream
        let mut again = root.derive("init");
        assert_eq!(again.next_u64(), first_init);
        // deriving is read-only on the parent
        assert_ne!(root.derive("init").seed(), root.seed());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::new(9);
        let mut v: Vec<usize> = (0..100).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, (0..100).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn norm_squared_matches_sum_of_squares(
            data in proptest::collection::vec(-1e3f64..1e3, 1..64)
        ) {
            let v = ParamVector::flat(data.clone());
            let norm = v.l2_norm().unwrap();
            let sum_sq: f64 = data.iter().map(|x| x * x).sum();
            let rel = (norm * norm - sum_sq).abs() / sum_sq.max(f64::MIN_POSITIVE);
            prop_assert!(rel <= 1e-12, "rel err {rel}");
        }

        #[test]
        fn triangle_inequality(
            x in proptest::collection::vec(-1e3f64..1e3, 1..32),
            y in proptest::collection::vec(-1e3f64..1e3, 1..32),
        ) {
            let n = x.len().min(y.len());
            let xv = ParamVector::flat(x[..n].to_vec());
            let yv = ParamVector::flat(y[..n].to_vec());
            let sum = axpy(1.0, &xv, &yv).unwrap();
            prop_assert!(
                sum.l2_norm().unwrap()
                    <= xv.l2_norm().unwrap() + yv.l2_norm().unwrap() + 1e-12
            );
        }

        #[test]
        fn rng_replay_is_bitwise(seed in any::<u64>(), n in 1usize..256) {
            let mut a = Rng::new(seed);
            let mut b = Rng::new(seed);
            let va = rng_uniform(&mut a, -2.0, 3.0, n).unwrap();
            let vb = rng_uniform(&mut b, -2.0, 3.0, n).unwrap();
            prop_assert!(va
                .data()
                .iter()
                .zip(vb.data())
                .all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
