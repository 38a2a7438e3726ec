//! Configs compiled into the binary, addressable by name.

/// `(name, text)` for every embedded preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("base", include_str!("../../presets/base.cfg")),
    ("synth-baseline", include_str!("../../presets/synth-baseline.cfg")),
    ("synth-maxpert-ss-nmlseq-fwdseq", include_str!("../../presets/synth-maxpert-ss-nmlseq-fwdseq.cfg")),
    ("table2-forget-bias-ones", include_str!("../../presets/table2-forget-bias-ones.cfg")),
    ("table2-forget-bias-ones-min6", include_str!("../../presets/table2-forget-bias-ones-min6.cfg")),
    ("table2-random-init", include_str!("../../presets/table2-random-init.cfg")),
    ("table3-ninefold", include_str!("../../presets/table3-ninefold.cfg")),
    ("table3-twentyfold", include_str!("../../presets/table3-twentyfold.cfg")),
    ("table4-stack3-stride3", include_str!("../../presets/table4-stack3-stride3.cfg")),
    ("table4-stack3-stride3-ninefold", include_str!("../../presets/table4-stack3-stride3-ninefold.cfg")),
    ("table5-forward-sequence", include_str!("../../presets/table5-forward-sequence.cfg")),
    ("table5-forward-step", include_str!("../../presets/table5-forward-step.cfg")),
    ("table5-nml-sequence", include_str!("../../presets/table5-nml-sequence.cfg")),
    ("table5-nml-step", include_str!("../../presets/table5-nml-step.cfg")),
    ("table5-rnndrop-step", include_str!("../../presets/table5-rnndrop-step.cfg")),
    ("table5-stacked-forward-sequence", include_str!("../../presets/table5-stacked-forward-sequence.cfg")),
    ("table5-stacked-forward-step", include_str!("../../presets/table5-stacked-forward-step.cfg")),
    ("table6-nml-seq-fwd-seq", include_str!("../../presets/table6-nml-seq-fwd-seq.cfg")),
    ("table6-nml-seq-fwd-step", include_str!("../../presets/table6-nml-seq-fwd-step.cfg")),
    ("table6-nml-step-fwd-seq", include_str!("../../presets/table6-nml-step-fwd-seq.cfg")),
    ("table6-nml-step-fwd-step", include_str!("../../presets/table6-nml-step-fwd-step.cfg")),
    ("table6-rnndrop-step-fwd-seq", include_str!("../../presets/table6-rnndrop-step-fwd-seq.cfg")),
    ("table6-rnndrop-step-fwd-step", include_str!("../../presets/table6-rnndrop-step-fwd-step.cfg")),
    ("table7-nml-seq-fwd-seq-stochastic", include_str!("../../presets/table7-nml-seq-fwd-seq-stochastic.cfg")),
    ("table7-nml-seq-fwd-step-stochastic", include_str!("../../presets/table7-nml-seq-fwd-step-stochastic.cfg")),
    ("table7-nml-step-fwd-seq-stochastic", include_str!("../../presets/table7-nml-step-fwd-seq-stochastic.cfg")),
    ("table7-nml-step-fwd-step-stochastic", include_str!("../../presets/table7-nml-step-fwd-step-stochastic.cfg")),
    ("table8-cascade", include_str!("../../presets/table8-cascade.cfg")),
];

pub fn embedded_preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
