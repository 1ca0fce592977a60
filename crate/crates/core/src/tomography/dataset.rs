use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::setting::{outcome_probabilities, Pauli, TomographySetting};
use crate::error::{Error, Result};
use crate::state::TwoQubitState;

/// Coincidence counts for the nine settings, indexed by [`TomographySetting::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TomographyDataset {
    pub shots: u64,
    pub seed: u64,
    pub counts: [[u64; 4]; 9],
}

impl TomographyDataset {
    pub fn counts_for(&self, s: TomographySetting) -> [u64; 4] {
        self.counts[s.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# shots={} seed={}\n", self.shots, self.seed);
        for s in TomographySetting::all() {
            let n = self.counts_for(s);
            writeln!(out, "{} {} {} {} {} {}", s.pauli_a, s.pauli_b, n[0], n[1], n[2], n[3]).unwrap();
        }
        out
    }

    /// Parse the text format written by [`TomographyDataset::to_text`]. Every
    /// setting must appear exactly once; order is free.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty dataset".into()))?;
        let (shots, seed) = parse_header(header)?;
        let mut counts = [[0u64; 4]; 9];
        let mut seen = [false; 9];
        for line in lines {
            if line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields, got `{line}`")));
            }
            let s = TomographySetting::new(f[0].parse::<Pauli>()?, f[1].parse::<Pauli>()?);
            if std::mem::replace(&mut seen[s.index()], true) {
                return Err(Error::Parse(format!("setting {s} repeated")));
            }
            for k in 0..4 {
                counts[s.index()][k] = f[2 + k]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad count `{}` in setting {s}", f[2 + k])))?;
            }
        }
        if let Some(i) = seen.iter().position(|x| !x) {
            return Err(Error::Parse(format!("setting {} missing", TomographySetting::all()[i])));
        }
        Ok(Self { shots, seed, counts })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn parse_header(line: &str) -> Result<(u64, u64)> {
    let bad = || Error::Parse(format!("bad dataset header `{line}`"));
    let rest = line.strip_prefix('#').ok_or_else(bad)?;
    let (mut shots, mut seed) = (None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(bad)?;
        let v: u64 = v.parse().map_err(|_| bad())?;
        match k {
            "shots" => shots = Some(v),
            "seed" => seed = Some(v),
            _ => return Err(bad()),
        }
    }
    Ok((shots.ok_or_else(bad)?, seed.ok_or_else(bad)?))
}

/// Multinomial draw of `shots` events per setting. One ChaCha8 stream seeded
/// from `seed` is consumed setting by setting, outcome by outcome.
pub fn sample_counts(rho: &TwoQubitState, shots: u64, seed: u64) -> Result<TomographyDataset> {
    if shots == 0 {
        return Err(Error::InvalidParams("shots per setting must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [[0u64; 4]; 9];
    for s in TomographySetting::all() {
        let p = outcome_probabilities(rho, s);
        let total: f64 = p.iter().sum();
        let mut remaining_n = shots;
        let mut remaining_p = total;
        for k in 0..3 {
            let n = if remaining_n == 0 || p[k] <= 0.0 {
                0
            } else if p[k] >= remaining_p {
                remaining_n
            } else {
                Binomial::new(remaining_n, p[k] / remaining_p)
                    .map_err(|e| Error::Numerical(format!("binomial draw: {e}")))?
                    .sample(&mut rng)
            };
            counts[s.index()][k] = n;
            remaining_n -= n;
            remaining_p -= p[k];
        }
        counts[s.index()][3] = remaining_n;
    }
    Ok(TomographyDataset { shots, seed, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{c, CMat4};

    fn some_state() -> TwoQubitState {
        let m = CMat4::from_fn(|i, j| c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        TwoQubitState::from_unnormalized(m * m.adjoint()).unwrap()
    }

    #[test]
    fn same_seed_same_dataset() {
        let r = some_state();
        assert_eq!(sample_counts(&r, 1000, 7).unwrap(), sample_counts(&r, 1000, 7).unwrap());
        assert_ne!(sample_counts(&r, 1000, 7).unwrap(), sample_counts(&r, 1000, 8).unwrap());
    }

    #[test]
    fn counts_sum_to_shots() {
        let ds = sample_counts(&some_state(), 12345, 1).unwrap();
        assert!(ds.counts.iter().all(|row| row.iter().sum::<u64>() == 12345));
        assert_eq!(ds.total(), 9 * 12345);
    }

    #[test]
    fn singlet_zz_never_correlated() {
        let zz = TomographySetting::new(Pauli::Z, Pauli::Z);
        for seed in 0..20 {
            let n = sample_counts(&TwoQubitState::singlet(), 500, seed).unwrap().counts_for(zz);
            assert_eq!((n[0], n[3]), (0, 0));
        }
    }

    #[test]
    fn frequencies_converge() {
        let r = some_state();
        let shots = 1_000_000;
        let ds = sample_counts(&r, shots, 3).unwrap();
        for s in TomographySetting::all() {
            let p = outcome_probabilities(&r, s);
            for (k, n) in ds.counts_for(s).iter().enumerate() {
                assert!((*n as f64 / shots as f64 - p[k]).abs() < 5e-3);
            }
        }
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(sample_counts(&some_state(), 0, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let ds = sample_counts(&some_state(), 777, 42).unwrap();
        let text = ds.to_text();
        assert!(text.starts_with("# shots=777 seed=42\nX X "));
        let back = TomographyDataset::from_text(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn malformed_text_rejected() {
        let good = sample_counts(&some_state(), 10, 1).unwrap().to_text();
        assert!(TomographyDataset::from_text("").is_err());
        assert!(TomographyDataset::from_text(&good.replace("shots", "shot")).is_err());
        let missing: String = good.lines().take(9).map(|l| format!("{l}\n")).collect();
        assert!(TomographyDataset::from_text(&missing).is_err());
        let repeated = format!("{good}X X 1 2 3 4\n");
        assert!(TomographyDataset::from_text(&repeated).is_err());
        assert!(TomographyDataset::from_text(&good.replacen("X X", "X Q", 1)).is_err());
        assert!(TomographyDataset::from_text(&good.replacen("X X ", "X X -", 1)).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        let ds = sample_counts(&some_state(), 99, 5).unwrap();
        ds.write(&path).unwrap();
        assert_eq!(TomographyDataset::read(&path).unwrap(), ds);
    }
}
