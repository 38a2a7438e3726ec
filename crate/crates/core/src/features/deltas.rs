use super::FeatureMatrix;

/// Half-width of the delta regression window.
pub const DELTA_WINDOW: usize = 2;

/// Regression slope over ±`DELTA_WINDOW` frames with edge replication.
fn regress(data: &[f64], frames: usize, dim: usize) -> Vec<f64> {
    let n = DELTA_WINDOW as isize;
    let denom: f64 = 2.0 * (1..=n).map(|k| (k * k) as f64).sum::<f64>();
    let clamp = |t: isize| t.clamp(0, frames as isize - 1) as usize;
    let mut out = vec![0.0; frames * dim];
    for t in 0..frames as isize {
        let row = &mut out[t as usize * dim..(t as usize + 1) * dim];
        for k in 1..=n {
            let ahead = &data[clamp(t + k) * dim..][..dim];
            let behind = &data[clamp(t - k) * dim..][..dim];
            for ((o, a), b) in row.iter_mut().zip(ahead).zip(behind) {
                *o += k as f64 * (a - b);
            }
        }
        row.iter_mut().for_each(|o| *o /= denom);
    }
    out
}

/// Appends Δ and ΔΔ columns: each output row is `[x_t, Δ_t, ΔΔ_t]`.
pub fn append_deltas(fm: &FeatureMatrix) -> FeatureMatrix {
    let (frames, dim) = (fm.frames(), fm.dim());
    let delta = regress(fm.data(), frames, dim);
    let delta2 = regress(&delta, frames, dim);
    let mut out = Vec::with_capacity(frames * dim * 3);
    for t in 0..frames {
        out.extend_from_slice(fm.row(t));
        out.extend_from_slice(&delta[t * dim..(t + 1) * dim]);
        out.extend_from_slice(&delta2[t * dim..(t + 1) * dim]);
    }
    fm.with_data(out, dim * 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Provenance;

    fn matrix(data: Vec<f64>, dim: usize) -> FeatureMatrix {
        FeatureMatrix::new(data, dim, 10.0, "u", "s", Provenance::default()).unwrap()
    }

    #[test]
    fn constant_input_has_zero_deltas() {
        let fm = append_deltas(&matrix(vec![3.25; 7 * 40], 40));
        assert_eq!(fm.dim(), 120);
        for row in fm.rows() {
            assert!(row[..40].iter().all(|&v| v == 3.25));
            assert!(row[40..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn ramp_has_unit_slope_in_the_interior() {
        let c = 0.75;
        let frames = 12;
        let fm = append_deltas(&matrix((0..frames).map(|t| c * t as f64).collect(), 1));
        for t in DELTA_WINDOW..frames - DELTA_WINDOW {
            assert!((fm.row(t)[1] - c).abs() < 1e-12, "Δ at {t}");
        }
        // ΔΔ needs Δ to be interior across its own ±2 window.
        for t in 2 * DELTA_WINDOW..frames - 2 * DELTA_WINDOW {
            assert!(fm.row(t)[2].abs() < 1e-12, "ΔΔ at {t}");
        }
    }

    #[test]
    fn single_frame_is_fine() {
        let fm = append_deltas(&matrix(vec![1.0, 2.0], 2));
        assert_eq!(fm.data(), &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
