//! Localization centers and fitted exponential decay masses of eigenvectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::geometry::{point_distance, Config};
use crate::spectral::SpectralData;

/// Shells whose statistic falls at or below this are left out of the fit.
pub const SHELL_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShellStatistic {
    #[default]
    Max,
    Mean,
}

/// Point distances are measured from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayOrigin {
    #[default]
    LocalizationCenter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub center: Config,
    /// Decay rate per unit sup-norm distance.
    pub mass_hat: f64,
    pub intercept: f64,
    pub r2: f64,
    pub shells_used: usize,
    pub origin: DecayOrigin,
}

/// Site of largest `|psi|`, the lexicographically smallest one on ties.
pub fn localization_center(psi: &[f64], sites: &[Config]) -> Config {
    assert_eq!(psi.len(), sites.len(), "one amplitude per site");
    let mut best = 0;
    for i in 1..psi.len() {
        let (a, b) = (psi[i].abs(), psi[best].abs());
        if a > b || (a == b && sites[i].coords() < sites[best].coords()) {
            best = i;
        }
    }
    sites[best].clone()
}

/// Least-squares fit of `ln(shell statistic)` against the sup-norm radius
/// around the localization center.
pub fn fit_decay_mass(psi: &[f64], sites: &[Config], statistic: ShellStatistic) -> Result<DecayFit> {
    let center = localization_center(psi, sites);
    let radii: Vec<usize> = sites
        .iter()
        .map(|s| point_distance(s.coords(), center.coords()) as usize)
        .collect();
    let shells = radii.iter().max().map_or(0, |&r| r + 1);
    let mut stat = vec![0.0f64; shells];
    let mut count = vec![0usize; shells];
    for (&r, &a) in radii.iter().zip(psi) {
        count[r] += 1;
        match statistic {
            ShellStatistic::Max => stat[r] = stat[r].max(a.abs()),
            ShellStatistic::Mean => stat[r] += a.abs(),
        }
    }
    if statistic == ShellStatistic::Mean {
        for (s, &c) in stat.iter_mut().zip(&count) {
            if c > 0 {
                *s /= c as f64;
            }
        }
    }
    let points: Vec<(f64, f64)> = stat
        .iter()
        .enumerate()
        .filter(|&(r, &s)| count[r] > 0 && s > SHELL_FLOOR)
        .map(|(r, &s)| (r as f64, s.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientShells(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(DecayFit {
        center,
        mass_hat: -slope,
        intercept,
        r2,
        shells_used: points.len(),
        origin: DecayOrigin::LocalizationCenter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassSummary {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub fraction_positive: f64,
    /// Distribution-free 95% interval for the median from order statistics.
    pub median_ci95: [f64; 2],
}

impl MassSummary {
    /// `None` for an empty sample.
    pub fn from_masses(masses: &[f64]) -> Option<Self> {
        if masses.is_empty() {
            return None;
        }
        let mut sorted = masses.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut data = Data::new(sorted.clone());
        let n = sorted.len();
        let positive = sorted.iter().filter(|&&m| m > 0.0).count();
        Some(MassSummary {
            count: n,
            median: data.median(),
            q1: data.lower_quartile(),
            q3: data.upper_quartile(),
            fraction_positive: positive as f64 / n as f64,
            median_ci95: median_interval(&sorted),
        })
    }
}

/// `[x_(k), x_(n+1-k)]` for the largest `k` with `P(Bin(n, 1/2) < k) ≤ 0.025`;
/// the full range when no such `k ≥ 1` exists.
fn median_interval(sorted: &[f64]) -> [f64; 2] {
    let n = sorted.len();
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    let mut k = 0;
    while k < n.div_ceil(2) && bin.cdf(k as u64) <= 0.025 {
        k += 1;
    }
    let k = k.max(1);
    [sorted[k - 1], sorted[n - k]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDecay {
    pub index: usize,
    pub eigenvalue: f64,
    pub fit: DecayFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassProfile {
    pub window: [f64; 2],
    pub fits: Vec<EigenDecay>,
    /// Eigenstates in the window with too few usable shells.
    pub skipped: Vec<usize>,
    pub summary: Option<MassSummary>,
}

impl MassProfile {
    pub fn masses(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.fit.mass_hat).collect()
    }
}

/// Energies spanning the central half of the spectrum by eigenvalue index.
pub fn central_half(spectral: &SpectralData) -> [f64; 2] {
    let n = spectral.eigenvalues.len();
    if n == 0 {
        return [1.0, 0.0];
    }
    let lo = n / 4;
    let hi = (n - n / 4).max(lo + 1) - 1;
    [spectral.eigenvalues[lo], spectral.eigenvalues[hi]]
}

/// Decay fits for every eigenstate with eigenvalue in `[window[0], window[1]]`.
pub fn mass_profile(
    spectral: &SpectralData,
    sites: &[Config],
    window: [f64; 2],
    statistic: ShellStatistic,
) -> MassProfile {
    let selected: Vec<usize> = (0..spectral.eigenvalues.len())
        .filter(|&i| {
            let e = spectral.eigenvalues[i];
            e >= window[0] && e <= window[1]
        })
        .collect();
    let results: Vec<(usize, Result<DecayFit>)> = selected
        .par_iter()
        .map(|&i| {
            let psi: Vec<f64> = spectral.eigenvectors.column(i).iter().copied().collect();
            (i, fit_decay_mass(&psi, sites, statistic))
        })
        .collect();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in results {
        match r {
            Ok(fit) => fits.push(EigenDecay {
                index: i,
                eigenvalue: spectral.eigenvalues[i],
                fit,
            }),
            Err(_) => skipped.push(i),
        }
    }
    let masses: Vec<f64> = fits.iter().map(|f| f.fit.mass_hat).collect();
    MassProfile {
        window,
        summary: MassSummary::from_masses(&masses),
        fits,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_permutation, BoxSpec, Permutation};
    use crate::hamiltonian::{assemble, ModelParams};
    use crate::spectral::diagonalize;
    use proptest::prelude::*;

    fn normalized(mut v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        v
    }

    fn exponential(b: &BoxSpec, c: &[i64], m: f64) -> (Vec<Config>, Vec<f64>) {
        let sites = b.sites();
        let psi = sites
            .iter()
            .map(|s| (-m * point_distance(s.coords(), c) as f64).exp())
            .collect();
        (sites, normalized(psi))
    }

    #[test]
    fn center_of_delta_and_uniform() {
        let b = BoxSpec::new(Config::line(&[0]), 5);
        let sites = b.sites();
        let mut psi = vec![0.0; 5];
        psi[3] = -1.0;
        assert_eq!(localization_center(&psi, &sites), Config::line(&[1]));
        let flat = normalized(vec![1.0; 5]);
        assert_eq!(localization_center(&flat, &sites), Config::line(&[-2]));
    }

    #[test]
    fn center_matches_argmax_of_disordered_state() {
        let b = BoxSpec::new(Config::line(&[0]), 21);
        let p = ModelParams::new(1, 1, 10.0, 4);
        let v = p.potential_for(&b, 0);
        let op = assemble(&b, &p, &v).unwrap();
        let s = diagonalize(&op).unwrap();
        for i in [0, 7, 20] {
            let psi: Vec<f64> = s.eigenvectors.column(i).iter().copied().collect();
            let (arg, _) = psi
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (j, x)| if x.abs() > acc.1 { (j, x.abs()) } else { acc });
            assert_eq!(localization_center(&psi, op.sites()), op.sites()[arg]);
        }
    }

    #[test]
    fn recovers_planted_mass() {
        let b = BoxSpec::new(Config::line(&[0]), 33);
        for k in 0..=18 {
            let m = 0.2 + 0.1 * k as f64;
            let (sites, psi) = exponential(&b, &[3], m);
            let fit = fit_decay_mass(&psi, &sites, ShellStatistic::Max).unwrap();
            assert!((fit.mass_hat - m).abs() <= 0.02 * m, "m = {m}: {}", fit.mass_hat);
            assert_eq!(fit.center, Config::line(&[3]));
            assert!(fit.r2 > 0.999);
        }
        let b2 = BoxSpec::new(Config::new(vec![vec![0, 0]]).unwrap(), 33);
        let (sites, psi) = exponential(&b2, &[-4, 5], 0.7);
        let fit = fit_decay_mass(&psi, &sites, ShellStatistic::Max).unwrap();
        assert!((fit.mass_hat - 0.7).abs() < 0.01);
        let mean = fit_decay_mass(&psi, &sites, ShellStatistic::Mean).unwrap();
        assert!((mean.mass_hat - 0.7).abs() < 0.01);
    }

    #[test]
    fn flat_vector_has_zero_mass() {
        let b = BoxSpec::new(Config::line(&[0]), 9);
        let psi = normalized(vec![1.0; 9]);
        let fit = fit_decay_mass(&psi, &b.sites(), ShellStatistic::Max).unwrap();
        assert!(fit.mass_hat.abs() < 1e-12);
        assert_eq!(fit.shells_used, 9);
    }

    #[test]
    fn delta_vector_has_one_shell() {
        let b = BoxSpec::new(Config::line(&[0]), 9);
        let mut psi = vec![0.0; 9];
        psi[4] = 1.0;
        let err = fit_decay_mass(&psi, &b.sites(), ShellStatistic::Max).unwrap_err();
        assert!(matches!(err, Error::InsufficientShells(1)));
    }

    #[test]
    fn free_chain_is_extended() {
        let b = BoxSpec::new(Config::line(&[0]), 41);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let v = p.potential_for(&b, 0);
        let op = assemble(&b, &p, &v).unwrap();
        let s = diagonalize(&op).unwrap();
        let prof = mass_profile(&s, op.sites(), central_half(&s), ShellStatistic::Max);
        let sum = prof.summary.unwrap();
        assert!(sum.median.abs() < 0.05, "{}", sum.median);
    }

    #[test]
    fn empty_window() {
        let b = BoxSpec::new(Config::line(&[0]), 5);
        let p = ModelParams::new(1, 1, 1.0, 0);
        let v = p.potential_for(&b, 0);
        let op = assemble(&b, &p, &v).unwrap();
        let s = diagonalize(&op).unwrap();
        let prof = mass_profile(&s, op.sites(), [100.0, 101.0], ShellStatistic::Max);
        assert!(prof.fits.is_empty() && prof.summary.is_none());
    }

    #[test]
    fn median_interval_brackets_median() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = MassSummary::from_masses(&xs).unwrap();
        // order statistics 40 and 61 (1-based) for n = 100
        assert_eq!(s.median_ci95, [39.0, 60.0]);
        assert!((s.median - 49.5).abs() < 1e-12);
        let tiny = MassSummary::from_masses(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(tiny.median_ci95, [1.0, 3.0]);
    }

    proptest! {
        #[test]
        fn sign_and_relabel_invariance(seed in 0u64..1000, m in 0.2f64..1.5) {
            let b = BoxSpec::new(Config::line(&[0, 2]), 9);
            let sites = b.sites();
            let mut rng = seed;
            let psi: Vec<f64> = sites
                .iter()
                .map(|s| {
                    rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let noise = 1.0 + 0.5 * ((rng >> 33) as f64 / (1u64 << 31) as f64);
                    noise * (-m * point_distance(s.coords(), &[1, 1]) as f64).exp()
                })
                .collect();
            let psi = normalized(psi);
            let fit = fit_decay_mass(&psi, &sites, ShellStatistic::Max).unwrap();
            let neg: Vec<f64> = psi.iter().map(|x| -x).collect();
            let f_neg = fit_decay_mass(&neg, &sites, ShellStatistic::Max).unwrap();
            prop_assert_eq!(fit.mass_hat, f_neg.mass_hat);
            let swap = Permutation::transposition(2, 0, 1);
            let moved: Vec<Config> = sites.iter().map(|s| apply_permutation(s, &swap).unwrap()).collect();
            let f_perm = fit_decay_mass(&psi, &moved, ShellStatistic::Max).unwrap();
            prop_assert!((fit.mass_hat - f_perm.mass_hat).abs() < 1e-12);
        }
    }
}
