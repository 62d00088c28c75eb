//! Deterministic stratified sampling by attack class.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AttackClass, NumericInstance};

const RATIO_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("class ratios sum to {0}, expected 1 within {RATIO_SUM_TOLERANCE:e}")]
    BadRatioSum(f64),
    #[error("ratio for {0} is negative or not finite")]
    BadRatio(AttackClass),
    #[error("class {0} was requested but has no source records")]
    EmptyClass(AttackClass),
}

/// Per-class sampling fractions. Must sum to 1 within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRatios {
    pub normal: f64,
    pub probe: f64,
    pub dos: f64,
    pub u2r: f64,
    pub r2l: f64,
}

impl ClassRatios {
    pub fn get(&self, class: AttackClass) -> f64 {
        match class {
            AttackClass::Normal => self.normal,
            AttackClass::Probe => self.probe,
            AttackClass::DoS => self.dos,
            AttackClass::U2R => self.u2r,
            AttackClass::R2L => self.r2l,
        }
    }

    fn validate(&self) -> Result<(), SampleError> {
        for class in AttackClass::ALL {
            let r = self.get(class);
            if !r.is_finite() || r < 0.0 {
                return Err(SampleError::BadRatio(class));
            }
        }
        let sum: f64 = AttackClass::ALL.iter().map(|&c| self.get(c)).sum();
        if (sum - 1.0).abs() > RATIO_SUM_TOLERANCE {
            return Err(SampleError::BadRatioSum(sum));
        }
        Ok(())
    }
}

/// Requested vs drawn counts per class (index order = [`AttackClass::ALL`]).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleReport {
    pub requested: [usize; 5],
    pub taken: [usize; 5],
}

impl SampleReport {
    pub fn shortfall(&self, class: AttackClass) -> usize {
        let i = class.index();
        self.requested[i] - self.taken[i]
    }

    pub fn total_taken(&self) -> usize {
        self.taken.iter().sum()
    }

    pub fn has_shortfall(&self) -> bool {
        self.requested != self.taken
    }
}

/// Largest-remainder apportionment of `total` across the five classes.
///
/// Floors of `ratio * total` are topped up one by one in order of descending
/// fractional remainder (ties to the earlier class in report order) until the
/// counts sum to `total`.
pub fn target_counts(ratios: &ClassRatios, total: usize) -> Result<[usize; 5], SampleError> {
    ratios.validate()?;
    let mut counts = [0usize; 5];
    let mut remainders = [0f64; 5];
    let mut assigned = 0usize;
    for class in AttackClass::ALL {
        let exact = ratios.get(class) * total as f64;
        let floor = exact.floor() as usize;
        counts[class.index()] = floor;
        remainders[class.index()] = exact - floor as f64;
        assigned += floor;
    }
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| {
        remainders[b]
            .partial_cmp(&remainders[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut leftover = total.saturating_sub(assigned);
    while leftover > 0 {
        for &i in &order {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
    }
    Ok(counts)
}

/// Picks indices into `classes` so the class histogram matches
/// [`target_counts`] exactly when supply suffices. Classes are drawn in
/// report order from one seeded generator, so the result is a pure function
/// of `(classes, ratios, total, seed)`. Returned indices are ascending.
///
/// When a class has fewer records than requested, all of them are taken and
/// the report shows the shortfall; with `strict` set, a requested class with
/// zero records is an error instead.
pub fn stratified_indices(
    classes: &[AttackClass],
    ratios: &ClassRatios,
    total: usize,
    seed: u64,
    strict: bool,
) -> Result<(Vec<usize>, SampleReport), SampleError> {
    let requested = target_counts(ratios, total)?;
    let mut pools: [Vec<usize>; 5] = Default::default();
    for (idx, class) in classes.iter().enumerate() {
        pools[class.index()].push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(total);
    let mut report = SampleReport {
        requested,
        ..SampleReport::default()
    };
    for class in AttackClass::ALL {
        let want = requested[class.index()];
        let pool = &pools[class.index()];
        if want > 0 && pool.is_empty() && strict {
            return Err(SampleError::EmptyClass(class));
        }
        let take = want.min(pool.len());
        report.taken[class.index()] = take;
        for chosen in rand::seq::index::sample(&mut rng, pool.len(), take) {
            picked.push(pool[chosen]);
        }
    }
    picked.sort_unstable();
    Ok((picked, report))
}

/// [`stratified_indices`] applied to instances.
pub fn stratified_sample(
    data: &[NumericInstance],
    ratios: &ClassRatios,
    total: usize,
    seed: u64,
    strict: bool,
) -> Result<(Vec<NumericInstance>, SampleReport), SampleError> {
    let classes: Vec<AttackClass> = data.iter().map(|inst| inst.class).collect();
    let (indices, report) = stratified_indices(&classes, ratios, total, seed, strict)?;
    let sampled = indices.into_iter().map(|i| data[i].clone()).collect();
    Ok((sampled, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed_ratios() -> ClassRatios {
        ClassRatios {
            normal: 0.1969,
            probe: 0.0083,
            dos: 0.7924,
            u2r: 0.0001,
            r2l: 0.0023,
        }
    }

    #[test]
    fn largest_remainder_hits_total_exactly() {
        // floors 4863/205/19573/2/56 leave 2 units; the two largest
        // remainders are r2l (.8123) and normal (.6269)
        let counts = target_counts(&skewed_ratios(), 24701).unwrap();
        assert_eq!(counts, [4864, 205, 19573, 2, 57]);
        assert_eq!(counts.iter().sum::<usize>(), 24701);
    }

    #[test]
    fn ratio_sum_is_validated() {
        let bad = ClassRatios {
            normal: 0.5,
            probe: 0.1,
            dos: 0.3,
            u2r: 0.05,
            r2l: 0.04,
        };
        assert!(matches!(
            target_counts(&bad, 100),
            Err(SampleError::BadRatioSum(_))
        ));
        let nan = ClassRatios {
            normal: f64::NAN,
            probe: 0.1,
            dos: 0.3,
            u2r: 0.05,
            r2l: 0.04,
        };
        assert!(matches!(
            target_counts(&nan, 100),
            Err(SampleError::BadRatio(_))
        ));
    }

    fn toy_data() -> Vec<NumericInstance> {
        let mut data = Vec::new();
        let mut push = |class, n| {
            for _ in 0..n {
                data.push(NumericInstance {
                    features: [0.0; 41],
                    class,
                });
            }
        };
        push(AttackClass::Normal, 40);
        push(AttackClass::DoS, 50);
        push(AttackClass::Probe, 6);
        push(AttackClass::R2L, 3);
        push(AttackClass::U2R, 1);
        data
    }

    #[test]
    fn histogram_matches_requests_when_supply_suffices() {
        let ratios = ClassRatios {
            normal: 0.4,
            probe: 0.05,
            dos: 0.5,
            u2r: 0.01,
            r2l: 0.04,
        };
        let (sampled, report) = stratified_sample(&toy_data(), &ratios, 20, 7, false).unwrap();
        assert_eq!(report.requested, [8, 1, 10, 0, 1]);
        assert!(!report.has_shortfall());
        let mut hist = [0usize; 5];
        for inst in &sampled {
            hist[inst.class.index()] += 1;
        }
        assert_eq!(hist, report.taken);
    }

    #[test]
    fn total_zero_yields_empty_list() {
        let (sampled, report) =
            stratified_sample(&toy_data(), &skewed_ratios(), 0, 1, false).unwrap();
        assert!(sampled.is_empty());
        assert_eq!(report.total_taken(), 0);
    }

    #[test]
    fn same_seed_is_reproducible_and_seeds_differ() {
        let data = toy_data();
        let ratios = ClassRatios {
            normal: 0.5,
            probe: 0.0,
            dos: 0.5,
            u2r: 0.0,
            r2l: 0.0,
        };
        let classes: Vec<AttackClass> = data.iter().map(|i| i.class).collect();
        let (a, _) = stratified_indices(&classes, &ratios, 30, 99, false).unwrap();
        let (b, _) = stratified_indices(&classes, &ratios, 30, 99, false).unwrap();
        let (c, _) = stratified_indices(&classes, &ratios, 30, 100, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn shortfall_takes_what_is_available() {
        let ratios = ClassRatios {
            normal: 0.0,
            probe: 0.0,
            dos: 0.0,
            u2r: 1.0,
            r2l: 0.0,
        };
        let (sampled, report) = stratified_sample(&toy_data(), &ratios, 5, 3, false).unwrap();
        assert_eq!(sampled.len(), 1);
        assert_eq!(report.shortfall(AttackClass::U2R), 4);
    }

    #[test]
    fn strict_mode_rejects_empty_requested_class() {
        let data: Vec<NumericInstance> = toy_data()
            .into_iter()
            .filter(|i| i.class != AttackClass::U2R)
            .collect();
        let ratios = ClassRatios {
            normal: 0.5,
            probe: 0.0,
            dos: 0.0,
            u2r: 0.5,
            r2l: 0.0,
        };
        assert!(matches!(
            stratified_sample(&data, &ratios, 10, 1, true),
            Err(SampleError::EmptyClass(AttackClass::U2R))
        ));
        // lenient mode reports instead
        let (_, report) = stratified_sample(&data, &ratios, 10, 1, false).unwrap();
        assert_eq!(report.shortfall(AttackClass::U2R), 5);
    }
}
