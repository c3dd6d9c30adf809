//! Row selection for coresets.
//!
//! The deterministic rules keep the top rows by leverage until the remaining
//! leverage mass drops below a threshold; uniform and leverage-proportional
//! draws are the randomized baselines.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::leverage::{LeverageMode, LeverageProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplingMethod {
    Deterministic,
    DeterministicApprox,
    Uniform,
    Proportional,
}

impl SamplingMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplingMethod::Deterministic => "det",
            SamplingMethod::DeterministicApprox => "det-approx",
            SamplingMethod::Uniform => "uniform",
            SamplingMethod::Proportional => "prop",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            SamplingMethod::Deterministic | SamplingMethod::DeterministicApprox
        )
    }
}

impl std::fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" | "deterministic" => Ok(SamplingMethod::Deterministic),
            "det-approx" => Ok(SamplingMethod::DeterministicApprox),
            "uniform" | "unif" => Ok(SamplingMethod::Uniform),
            "prop" | "proportional" => Ok(SamplingMethod::Proportional),
            other => Err(Error::Format {
                line: 0,
                column: 0,
                message: format!("unknown sampling method {other:?}"),
            }),
        }
    }
}

/// Ordered subset of row indices; row `k` of the sampled matrix is row
/// `indices[k]` of the original.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSelection {
    pub indices: Vec<usize>,
    pub epsilon: Option<f64>,
    pub method: SamplingMethod,
    pub seed: Option<u64>,
    /// The score that drove each pick (leverage, approximate leverage, or the
    /// uniform inclusion weight).
    pub scores_used: Vec<f64>,
}

impl SampleSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Writes `rank,row_index,score_used` lines; rank is 1-based pick order.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "rank,row_index,score_used")?;
        for (k, (i, s)) in self.indices.iter().zip(&self.scores_used).enumerate() {
            writeln!(w, "{},{i},{}", k + 1, crate::io::format_f64(*s))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        self.write_csv(&mut f)
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(path, e))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1)")))
    }
}

fn top_rows(
    profile: &LeverageProfile,
    s: usize,
    epsilon: Option<f64>,
    method: SamplingMethod,
) -> SampleSelection {
    let indices: Vec<usize> = profile.order()[..s].to_vec();
    let scores_used = indices.iter().map(|&i| profile.scores()[i]).collect();
    SampleSelection {
        indices,
        epsilon,
        method,
        seed: None,
        scores_used,
    }
}

/// Smallest prefix (by descending leverage) whose sum strictly exceeds
/// `d - epsilon`, floored at `d`.
pub fn sample_deterministic(profile: &LeverageProfile, epsilon: f64) -> Result<SampleSelection> {
    check_epsilon(epsilon)?;
    if profile.mode() != LeverageMode::Exact {
        return Err(Error::InvalidArgument(
            "deterministic threshold sampling needs exact leverage scores".into(),
        ));
    }
    let d = profile.dim();
    let threshold = d as f64 - epsilon;
    let s = first_prefix(profile, |sum| sum > threshold).ok_or(Error::ThresholdUnreachable {
        threshold,
        total: profile.sum(),
    })?;
    Ok(top_rows(
        profile,
        s.max(d),
        Some(epsilon),
        SamplingMethod::Deterministic,
    ))
}

/// Threshold rule for approximate scores: with `t = sum_i l^_i`, the smallest
/// prefix whose sum reaches `t - (1 - alpha) epsilon` (non-strict), floored at
/// `d`.
pub fn sample_deterministic_approx(
    profile: &LeverageProfile,
    epsilon: f64,
) -> Result<SampleSelection> {
    check_epsilon(epsilon)?;
    let d = profile.dim();
    let total = profile.sum();
    let threshold = total - (1.0 - profile.alpha()) * epsilon;
    let s = first_prefix(profile, |sum| sum >= threshold)
        .ok_or(Error::ThresholdUnreachable { threshold, total })?;
    Ok(top_rows(
        profile,
        s.max(d),
        Some(epsilon),
        SamplingMethod::DeterministicApprox,
    ))
}

/// Top `s` rows by score, for runs driven by a sample size instead of a
/// threshold.
pub fn sample_top(profile: &LeverageProfile, s: usize) -> Result<SampleSelection> {
    check_size(profile.dim(), profile.len(), s)?;
    let method = match profile.mode() {
        LeverageMode::Exact => SamplingMethod::Deterministic,
        LeverageMode::Approximate => SamplingMethod::DeterministicApprox,
    };
    Ok(top_rows(profile, s, None, method))
}

fn first_prefix(profile: &LeverageProfile, reached: impl Fn(f64) -> bool) -> Option<usize> {
    let mut sum = 0.0;
    for (j, score) in profile.sorted_scores().enumerate() {
        sum += score;
        if reached(sum) {
            return Some(j + 1);
        }
    }
    None
}

fn check_size(d: usize, n: usize, s: usize) -> Result<()> {
    if s < d || s > n {
        return Err(Error::Dimension(format!(
            "sample size {s} outside [{d}, {n}]"
        )));
    }
    Ok(())
}

/// `s` distinct rows drawn uniformly without replacement.
pub fn sample_uniform(n: usize, d: usize, s: usize, seed: u64) -> Result<SampleSelection> {
    check_size(d, n, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, n, s).into_vec();
    Ok(SampleSelection {
        indices,
        epsilon: None,
        method: SamplingMethod::Uniform,
        seed: Some(seed),
        scores_used: vec![1.0 / n as f64; s],
    })
}

/// `s` distinct rows drawn one at a time with probability proportional to
/// their score among the rows not yet drawn.
pub fn sample_proportional(
    profile: &LeverageProfile,
    s: usize,
    seed: u64,
) -> Result<SampleSelection> {
    let n = profile.len();
    check_size(profile.dim(), n, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = FenwickTree::new(profile.scores());
    let mut taken = vec![false; n];
    let mut indices = Vec::with_capacity(s);
    for k in 0..s {
        let total = tree.total();
        let i = if total > 0.0 {
            tree.find(rng.random::<f64>() * total)
        } else {
            // Only zero-score rows remain: fall back to a uniform pick.
            let r = rng.random_range(0..n - k);
            (0..n).filter(|&i| !taken[i]).nth(r).unwrap_or(0)
        };
        let i = if taken[i] {
            // Rounding in the prefix search can land on a spent slot.
            (0..n).find(|&j| !taken[j]).unwrap_or(i)
        } else {
            i
        };
        taken[i] = true;
        tree.set(i, 0.0);
        indices.push(i);
    }
    let scores_used = indices.iter().map(|&i| profile.scores()[i]).collect();
    Ok(SampleSelection {
        indices,
        epsilon: None,
        method: SamplingMethod::Proportional,
        seed: Some(seed),
        scores_used,
    })
}

/// Prefix sums over nonnegative weights with point updates.
struct FenwickTree {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl FenwickTree {
    fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        for (i, v) in values.iter().enumerate() {
            tree[i + 1] += v;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent <= n {
                let carry = tree[i + 1];
                tree[parent] += carry;
            }
        }
        Self {
            tree,
            values: values.to_vec(),
        }
    }

    fn total(&self) -> f64 {
        let mut i = self.values.len();
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum.max(0.0)
    }

    fn set(&mut self, idx: usize, value: f64) {
        let delta = value - self.values[idx];
        self.values[idx] = value;
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Coreset size predicted for power-law leverage decay
/// `l_(i) ~ i^{-(1 + eta)}`:
///
/// `max{ (2d/eps)^{1/(1+eta)} - 1, (2d/(eta eps))^{1/eta} - 1, d }`,
///
/// with `d -> d(1 + alpha)` and `eps -> (1 - alpha) eps` for approximate
/// scores. Returns the ceiling.
pub fn predict_sample_size(d: usize, epsilon: f64, eta: f64, alpha: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must be positive")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in [0, 1)")));
    }
    let dd = d as f64 * (1.0 + alpha);
    let eps = (1.0 - alpha) * epsilon;
    let first = (2.0 * dd / eps).powf(1.0 / (1.0 + eta)) - 1.0;
    let second = (2.0 * dd / (eta * eps)).powf(1.0 / eta) - 1.0;
    Ok(first.max(second).max(dd).ceil() as usize)
}
