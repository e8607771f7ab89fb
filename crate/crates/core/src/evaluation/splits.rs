//! Seeded train/test index splits.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    HoldOut,
    KFold,
    StratifiedKFold,
    ShuffleSplit,
}

impl SplitKind {
    pub fn is_folded(&self) -> bool {
        matches!(self, SplitKind::KFold | SplitKind::StratifiedKFold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub kind: SplitKind,
    /// HoldOut and ShuffleSplit.
    pub test_fraction: f64,
    /// KFold and StratifiedKFold.
    pub k: usize,
    /// ShuffleSplit.
    pub n_iterations: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn holdout(test_fraction: f64, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::HoldOut,
            test_fraction,
            k: 2,
            n_iterations: 1,
            seed,
        }
    }

    pub fn kfold(k: usize, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::KFold,
            test_fraction: DEFAULT_TEST_FRACTION,
            k,
            n_iterations: 1,
            seed,
        }
    }

    pub fn stratified(k: usize, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::StratifiedKFold,
            ..Self::kfold(k, seed)
        }
    }

    pub fn shuffle_split(n_iterations: usize, test_fraction: f64, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::ShuffleSplit,
            test_fraction,
            k: 2,
            n_iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SplitKind::HoldOut | SplitKind::ShuffleSplit => {
                if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
                    return Err(Error::contract(format!(
                        "test_fraction must be in (0, 1), got {}",
                        self.test_fraction
                    )));
                }
                if self.kind == SplitKind::ShuffleSplit && self.n_iterations == 0 {
                    return Err(Error::contract("n_iterations must be >= 1"));
                }
            }
            SplitKind::KFold | SplitKind::StratifiedKFold => {
                if self.k < 2 {
                    return Err(Error::contract(format!("k must be >= 2, got {}", self.k)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Number of held-out items for a holdout of `n` items: `floor(n * f)`,
/// kept within `1..=n-1` so both sides are non-empty.
pub fn holdout_test_size(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction).floor() as usize).clamp(1, n - 1)
}

/// Builds the splits described by `plan` over items `0..n`.
///
/// Folded kinds return index lists sorted ascending. HoldOut and
/// ShuffleSplit return indices in shuffled order, so any prefix of `train`
/// is a uniform random subset.
pub fn make_splits<S: AsRef<str>>(n: usize, labels: &[S], plan: &SplitPlan) -> Result<Vec<Split>> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let permutation = |rng: &mut ChaCha8Rng| {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    };
    match plan.kind {
        SplitKind::HoldOut | SplitKind::ShuffleSplit => {
            if n < 2 {
                return Err(Error::DegenerateCorpus(format!(
                    "need at least 2 items to split, got {n}"
                )));
            }
            let n_test = holdout_test_size(n, plan.test_fraction);
            let reps = if plan.kind == SplitKind::HoldOut {
                1
            } else {
                plan.n_iterations
            };
            Ok((0..reps)
                .map(|_| {
                    let p = permutation(&mut rng);
                    Split {
                        test: p[..n_test].to_vec(),
                        train: p[n_test..].to_vec(),
                    }
                })
                .collect())
        }
        SplitKind::KFold => {
            if n < plan.k {
                return Err(Error::DegenerateCorpus(format!(
                    "{n} items cannot fill k={} folds",
                    plan.k
                )));
            }
            let p = permutation(&mut rng);
            let mut fold_of = vec![0usize; n];
            let (base, extra) = (n / plan.k, n % plan.k);
            let mut start = 0;
            for f in 0..plan.k {
                let size = base + usize::from(f < extra);
                for &i in &p[start..start + size] {
                    fold_of[i] = f;
                }
                start += size;
            }
            Ok(folds_from_assignment(&fold_of, plan.k))
        }
        SplitKind::StratifiedKFold => {
            if labels.len() != n {
                return Err(Error::contract(format!(
                    "stratification needs {n} labels, got {}",
                    labels.len()
                )));
            }
            let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, l) in labels.iter().enumerate() {
                by_class.entry(l.as_ref()).or_default().push(i);
            }
            if let Some((class, members)) = by_class.iter().find(|(_, m)| m.len() < plan.k) {
                return Err(Error::Stratification {
                    class: class.to_string(),
                    count: members.len(),
                    k: plan.k,
                });
            }
            // Deal each class's shuffled members round-robin, continuing the
            // rotation across classes: per-class and total fold sizes both
            // differ by at most one.
            let mut fold_of = vec![0usize; n];
            let mut next = 0usize;
            for members in by_class.values_mut() {
                members.shuffle(&mut rng);
                for &i in members.iter() {
                    fold_of[i] = next % plan.k;
                    next += 1;
                }
            }
            Ok(folds_from_assignment(&fold_of, plan.k))
        }
    }
}

fn folds_from_assignment(fold_of: &[usize], k: usize) -> Vec<Split> {
    (0..k)
        .map(|f| {
            let (test, train) = (0..fold_of.len()).partition(|&i| fold_of[i] == f);
            Split { train, test }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const NO_LABELS: &[&str] = &[];

    #[test]
    fn ten_fold_sizes() {
        let splits = make_splits(10_369, NO_LABELS, &SplitPlan::kfold(10, 1)).unwrap();
        let sizes: Vec<usize> = splits.iter().map(|s| s.test.len()).collect();
        assert!(sizes.iter().all(|&s| s == 1036 || s == 1037), "{sizes:?}");
        assert_eq!(sizes.iter().sum::<usize>(), 10_369);
    }

    #[test]
    fn holdout_size() {
        let s = make_splits(10_369, NO_LABELS, &SplitPlan::holdout(0.2, 3)).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].test.len() == 2073 || s[0].test.len() == 2074);
        assert_eq!(s[0].train.len() + s[0].test.len(), 10_369);
    }

    #[test]
    fn same_seed_same_splits() {
        let labels: Vec<&str> = (0..50).map(|i| if i % 3 == 0 { "a" } else { "b" }).collect();
        for plan in [
            SplitPlan::kfold(5, 9),
            SplitPlan::stratified(5, 9),
            SplitPlan::holdout(0.3, 9),
            SplitPlan::shuffle_split(4, 0.25, 9),
        ] {
            assert_eq!(
                make_splits(50, &labels, &plan).unwrap(),
                make_splits(50, &labels, &plan).unwrap()
            );
        }
        assert_ne!(
            make_splits(50, &labels, &SplitPlan::kfold(5, 1)).unwrap(),
            make_splits(50, &labels, &SplitPlan::kfold(5, 2)).unwrap()
        );
    }

    #[test]
    fn stratification_error_names_class() {
        let labels = ["a", "a", "a", "b", "a"];
        let err = make_splits(5, &labels, &SplitPlan::stratified(2, 0)).unwrap_err();
        match err {
            Error::Stratification { class, count, k } => {
                assert_eq!((class.as_str(), count, k), ("b", 1, 2));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn invalid_plans() {
        assert!(make_splits(10, NO_LABELS, &SplitPlan::kfold(1, 0)).is_err());
        assert!(make_splits(3, NO_LABELS, &SplitPlan::kfold(4, 0)).is_err());
        assert!(make_splits(10, NO_LABELS, &SplitPlan::holdout(1.0, 0)).is_err());
        assert!(make_splits(10, NO_LABELS, &SplitPlan::holdout(0.0, 0)).is_err());
        assert!(make_splits(1, NO_LABELS, &SplitPlan::holdout(0.5, 0)).is_err());
        assert!(make_splits(10, NO_LABELS, &SplitPlan::shuffle_split(0, 0.2, 0)).is_err());
    }

    #[test]
    fn tiny_holdout_keeps_both_sides() {
        let s = make_splits(3, NO_LABELS, &SplitPlan::holdout(0.2, 0)).unwrap();
        assert_eq!((s[0].train.len(), s[0].test.len()), (2, 1));
    }
}
