use super::FeatureMatrix;

/// Concatenates frames `t-context ..= t+context` (edge frames replicated)
/// and keeps every `stride`-th stacked frame starting at 0.
///
/// `stride` must be at least 1. The output has `ceil(T / stride)` rows of
/// width `(2·context + 1)·D`, and its frame period is multiplied by `stride`.
pub fn stack_and_stride(fm: &FeatureMatrix, context: usize, stride: usize) -> FeatureMatrix {
    assert!(stride >= 1, "stride must be at least 1");
    if context == 0 && stride == 1 {
        return fm.clone();
    }
    let (frames, dim) = (fm.frames(), fm.dim());
    let width = (2 * context + 1) * dim;
    let out_frames = frames.div_ceil(stride);
    let mut data = Vec::with_capacity(out_frames * width);
    for t in (0..frames).step_by(stride) {
        for k in 0..=2 * context {
            let src = (t + k).saturating_sub(context).min(frames - 1);
            data.extend_from_slice(fm.row(src));
        }
    }
    let mut out = fm.with_data(data, width);
    out.frame_period_ms = fm.frame_period_ms * stride as f64;
    out.provenance.stacked = true;
    out
}
