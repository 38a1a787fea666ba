//! Per-dataset step-size constants `c` in `tau_t = 1 / (c sqrt(t))`, picked
//! from the grid {1, 10, 50, 100, 150}.

/// Default `c` for datasets without a preset.
pub const DEFAULT_STEP_SCALE: f64 = 1.0;

pub const STEP_SCALE_GRID: [f64; 5] = [1.0, 10.0, 50.0, 100.0, 150.0];

const PRESETS: &[(&str, f64)] = &[
    ("australian", 1.0),
    ("credit-a", 1.0),
    ("credit-g", 1.0),
    ("svmguide3", 1.0),
    ("diabetes", 10.0),
    ("splice", 10.0),
    ("german", 50.0),
    ("kr-vs-kp", 100.0),
    ("dna", 150.0),
    ("r.GR-IT", 10.0),
    ("r.GR-SP", 10.0),
    ("r.SP-FR", 10.0),
    ("r.EN-FR", 50.0),
    ("r.EN-IT", 50.0),
    ("r.EN-SP", 50.0),
    ("r.FR-GR", 50.0),
    ("r.FR-IT", 50.0),
    ("r.FR-SP", 50.0),
    ("r.GR-EN", 50.0),
    ("r.IT-EN", 50.0),
    ("r.IT-FR", 50.0),
    ("r.IT-GR", 50.0),
    ("r.IT-SP", 50.0),
    ("r.SP-EN", 50.0),
    ("r.SP-IT", 50.0),
    ("r.FR-EN", 100.0),
    ("r.EN-GR", 150.0),
    ("r.GR-FR", 150.0),
    ("r.SP-GR", 150.0),
];

pub fn step_scale_preset(dataset: &str) -> Option<f64> {
    PRESETS
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(dataset))
        .map(|(_, c)| *c)
}

pub fn step_scale_for(dataset: &str) -> f64 {
    step_scale_preset(dataset).unwrap_or(DEFAULT_STEP_SCALE)
}
