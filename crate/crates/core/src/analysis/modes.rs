use super::profile::{smooth, Bins, Profile1D};

/// One population of a two-mode distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub mean: f64,
    /// Standard deviation of the values assigned to the mode.
    pub width: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bimodality {
    /// Lower and upper modes.
    pub modes: [Mode; 2],
    /// Value separating the two populations.
    pub split: f64,
}

impl Bimodality {
    pub fn separation(&self) -> f64 {
        self.modes[1].mean - self.modes[0].mean
    }

    /// Separation in units of the wider mode.
    pub fn separation_in_widths(&self) -> f64 {
        self.separation() / self.modes[0].width.max(self.modes[1].width)
    }

    pub fn opposite_signs(&self) -> bool {
        self.modes[0].mean < 0.0 && self.modes[1].mean > 0.0
    }
}

fn mode_of(values: impl Iterator<Item = f64>) -> Mode {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let width = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    Mode { mean, width, count: v.len() }
}

/// Splits `values` into two populations at the deepest valley of a
/// smoothed histogram between its two highest peaks. Returns `None` for
/// a unimodal histogram or when either side holds fewer than
/// `min_count` values.
pub fn bimodality(values: &[f64], bins: usize, min_count: usize) -> Option<Bimodality> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = Bins::new(lo, hi, bins).ok()?;
    let profile = Profile1D::from_values(values.to_vec(), &bins, 0, 0);
    let h = smooth(&profile.values_normalized(), 1.0);
    let n = h.len();
    let peaks: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || h[i] > h[i - 1]) && (i + 1 == n || h[i] >= h[i + 1]))
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    // best pair of peaks: the one whose lower peak stands highest above
    // the valley between them
    let mut best: Option<(f64, usize)> = None;
    for a in 0..peaks.len() {
        for b in a + 1..peaks.len() {
            let (i, j) = (peaks[a], peaks[b]);
            let valley = (i..=j).min_by(|&x, &y| h[x].total_cmp(&h[y])).expect("non-empty");
            let prominence = h[i].min(h[j]) - h[valley];
            if best.is_none_or(|(p, _)| prominence > p) {
                best = Some((prominence, valley));
            }
        }
    }
    let (prominence, valley) = best?;
    if !(prominence > 0.0) {
        return None;
    }
    let split = profile.centers()[valley];
    let low = mode_of(values.iter().copied().filter(|&v| v < split));
    let high = mode_of(values.iter().copied().filter(|&v| v >= split));
    (low.count >= min_count && high.count >= min_count).then_some(Bimodality {
        modes: [low, high],
        split,
    })
}
