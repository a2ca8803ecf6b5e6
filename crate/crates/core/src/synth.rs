//! Bundled loan-approval fixtures and a seeded generator for a dataset with
//! a planted ZIP-code proxy leak.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const LOAN_ONTOLOGY: &str = include_str!("../fixtures/loan.fto");
/// Binds `credit_score` as the only feature.
pub const LOAN_BINDING: &str = include_str!("../fixtures/loan_binding.json");
/// Binds `credit_score` and `debt_ratio`.
pub const LOAN_BINDING_2D: &str = include_str!("../fixtures/loan_binding_2d.json");
/// Four applicants in two ZIP codes, one of them the named proxy ZIP.
pub const LOAN_CSV: &str = include_str!("../fixtures/loan.csv");

/// ZIP codes of the leaky fixture with their median incomes. The first four
/// fall under the `MedianIncome < 30000` axiom; 30000 itself does not.
pub const LEAKY_ZIPS: [(&str, u32); 8] = [
    ("12345", 24_000),
    ("23456", 27_500),
    ("34567", 29_999),
    ("45678", 18_000),
    ("56789", 52_000),
    ("67890", 30_000),
    ("78901", 61_000),
    ("89012", 45_000),
];

/// Mean credit-score penalty for applicants from low-income ZIP codes.
pub const LEAK_SHIFT: f64 = 40.0;

/// The three input documents of a pipeline run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub ontology: String,
    pub binding: String,
    pub dataset: String,
}

/// Paths of a [`Fixture`] written to disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub ontology: PathBuf,
    pub binding: PathBuf,
    pub dataset: PathBuf,
}

impl Fixture {
    /// Writes `loan.fto`, `binding.json` and `data.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<FixturePaths> {
        fs::create_dir_all(dir)?;
        let paths = FixturePaths {
            ontology: dir.join("loan.fto"),
            binding: dir.join("binding.json"),
            dataset: dir.join("data.csv"),
        };
        fs::write(&paths.ontology, &self.ontology)?;
        fs::write(&paths.binding, &self.binding)?;
        fs::write(&paths.dataset, &self.dataset)?;
        Ok(paths)
    }
}

/// The four-applicant loan scenario.
pub fn loan_fixture() -> Fixture {
    Fixture {
        ontology: LOAN_ONTOLOGY.to_string(),
        binding: LOAN_BINDING.to_string(),
        dataset: LOAN_CSV.to_string(),
    }
}

/// `per_zip` applicants in each of the eight [`LEAKY_ZIPS`].
///
/// Credit scores are `N(650, 50²)` minus [`LEAK_SHIFT`] in low-income ZIPs;
/// debt ratios are `N(0.3, 0.08²)` plus 0.05 there. Values are rounded to
/// one and three decimals respectively, so the CSV is exact.
pub fn leaky_loan_csv(seed: u64, per_zip: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let score = Normal::new(650.0f64, 50.0).expect("valid normal");
    let debt = Normal::new(0.3f64, 0.08).expect("valid normal");
    let mut out = String::from("applicant,zip,median_income,credit_score,debt_ratio\n");
    let mut id = 0;
    for (zip, income) in LEAKY_ZIPS {
        let low = income < 30_000;
        for _ in 0..per_zip {
            id += 1;
            let s = score.sample(&mut rng) - if low { LEAK_SHIFT } else { 0.0 };
            let d = (debt.sample(&mut rng) + if low { 0.05 } else { 0.0 }).max(0.0);
            writeln!(out, "A{id:04},{zip},{income},{s:.1},{d:.3}").expect("write to String");
        }
    }
    out
}

/// The loan ontology with a 400-row leaky dataset (50 applicants per ZIP,
/// two atoms of 200 rows), credit score as the single feature.
pub fn leaky_fixture(seed: u64) -> Fixture {
    Fixture {
        ontology: LOAN_ONTOLOGY.to_string(),
        binding: LOAN_BINDING.to_string(),
        dataset: leaky_loan_csv(seed, 50),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_seeded() {
        assert_eq!(leaky_loan_csv(3, 5), leaky_loan_csv(3, 5));
        assert_ne!(leaky_loan_csv(3, 5), leaky_loan_csv(4, 5));
        assert_eq!(leaky_loan_csv(3, 5).lines().count(), 1 + 8 * 5);
    }
}
