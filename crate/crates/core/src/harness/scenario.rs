use super::HarnessError;

/// One row of the benchmark scenario table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub peaks: usize,
    pub change_frequency: u64,
    pub dims: usize,
    pub shift_severity: f64,
}

const fn row(
    name: &'static str,
    peaks: usize,
    change_frequency: u64,
    dims: usize,
    shift_severity: f64,
) -> Scenario {
    Scenario {
        name,
        peaks,
        change_frequency,
        dims,
        shift_severity,
    }
}

pub const SCENARIOS: [Scenario; 12] = [
    row("F1", 5, 5000, 5, 1.0),
    row("F2", 10, 5000, 5, 1.0),
    row("F3", 25, 5000, 5, 1.0),
    row("F4", 50, 5000, 5, 1.0),
    row("F5", 100, 5000, 5, 1.0),
    row("F6", 10, 2500, 5, 1.0),
    row("F7", 10, 1000, 5, 1.0),
    row("F8", 10, 500, 5, 1.0),
    row("F9", 10, 5000, 10, 1.0),
    row("F10", 10, 5000, 20, 1.0),
    row("F11", 10, 5000, 5, 2.0),
    row("F12", 10, 5000, 5, 5.0),
];

/// Name accepted for a fully user-specified problem; starts from F1's values.
pub const CUSTOM: &str = "custom";

pub fn valid_names() -> String {
    let mut names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
    names.push(CUSTOM);
    names.join(", ")
}

/// Looks up a scenario by name (case-insensitive). `custom` resolves to
/// F1's numbers under the name `custom`.
pub fn resolve_scenario(name: &str) -> Result<Scenario, HarnessError> {
    if name.eq_ignore_ascii_case(CUSTOM) {
        return Ok(Scenario {
            name: CUSTOM,
            ..SCENARIOS[0]
        });
    }
    SCENARIOS
        .iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .copied()
        .ok_or_else(|| {
            HarnessError::Usage(format!(
                "unknown scenario {name:?}; valid scenarios: {}",
                valid_names()
            ))
        })
}
