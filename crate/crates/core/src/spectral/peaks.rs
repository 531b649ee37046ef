use super::Spectrum;

pub const DEFAULT_MAX_PEAKS: usize = 4;
pub const DEFAULT_MIN_REL_AMPLITUDE: f64 = 0.05;

/// Local maxima of `|F(γ)|` for `γ ∈ [0, K/2]` whose amplitude is at least
/// `min_rel_amplitude` times the largest amplitude in that range. The
/// `max_count` strongest survive, returned in ascending order of `γ`.
pub fn pick_peaks(spectrum: &Spectrum, max_count: usize, min_rel_amplitude: f64) -> Vec<usize> {
    let amp = spectrum.amplitudes();
    let half = amp.len() / 2;
    let top = amp[..=half].iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    let mut peaks: Vec<usize> = (0..=half)
        .filter(|&g| {
            let rises = g == 0 || amp[g] > amp[g - 1];
            let falls = g + 1 >= amp.len() || amp[g] >= amp[g + 1];
            rises && falls && amp[g] >= min_rel_amplitude * top
        })
        .collect();
    peaks.sort_by(|&a, &b| amp[b].total_cmp(&amp[a]).then(a.cmp(&b)));
    peaks.truncate(max_count);
    peaks.sort_unstable();
    peaks
}
