//! The office-building case study: eleven design variables over geometry,
//! fabric, HVAC and controls, available at four problem scales.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{BoundPolicy, DesignSpace, ElementTag, FieldTag, StartingBound, VariableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    VerySmall,
    Small,
    Medium,
    Large,
}

impl Scale {
    pub const ALL: [Scale; 4] = [Scale::VerySmall, Scale::Small, Scale::Medium, Scale::Large];

    fn bit(self) -> u8 {
        match self {
            Scale::VerySmall => V,
            Scale::Small => S,
            Scale::Medium => M,
            Scale::Large => L,
        }
    }

    /// Design-option count quoted for the scale in the case-study description.
    /// Only medium and large equal the product of the option table.
    pub fn quoted_design_options(self) -> u64 {
        match self {
            Scale::VerySmall => 874,
            Scale::Small => 52_400,
            Scale::Medium => 345_600,
            Scale::Large => 1_036_800,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scale::VerySmall => "very_small",
            Scale::Small => "small",
            Scale::Medium => "medium",
            Scale::Large => "large",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "very_small" | "very-small" | "vsmall" => Ok(Scale::VerySmall),
            "small" => Ok(Scale::Small),
            "medium" => Ok(Scale::Medium),
            "large" => Ok(Scale::Large),
            other => Err(Error::Config(vec![format!("unknown case-study scale `{other}`")])),
        }
    }
}

const V: u8 = 1;
const S: u8 = 2;
const M: u8 = 4;
const L: u8 = 8;
const ALL: u8 = V | S | M | L;

pub const SHAPE: &str = "shape";
pub const WWR: &str = "wwr";
pub const ORIENTATION: &str = "orientation";
pub const THERMAL_MASS: &str = "thermal_mass";
pub const INSULATION: &str = "insulation";
pub const WINDOW: &str = "window";
pub const DISTRIBUTION: &str = "distribution";
pub const PLANT: &str = "plant";
pub const SUPPLY_TEMP: &str = "supply_temp";
pub const SETPOINT: &str = "setpoint";
pub const SETBACK: &str = "setback";

struct VariableRow {
    name: &'static str,
    element: ElementTag,
    field: FieldTag,
    options: &'static [(&'static str, u8)],
    /// Single option used at scales where no option of this variable is marked.
    fallback: &'static str,
}

const TABLE: &[VariableRow] = &[
    VariableRow {
        name: SHAPE,
        element: ElementTag::Geometry,
        field: FieldTag::Architecture,
        options: &[("Rectangle", ALL), ("L-shape", S | M | L), ("Free form", ALL)],
        fallback: "Rectangle",
    },
    VariableRow {
        name: WWR,
        element: ElementTag::Geometry,
        field: FieldTag::Architecture,
        options: &[("25", ALL), ("50", ALL), ("75", M | L), ("95", ALL)],
        fallback: "25",
    },
    VariableRow {
        name: ORIENTATION,
        element: ElementTag::Geometry,
        field: FieldTag::Architecture,
        options: &[("0", S | M | L), ("45", S | M | L), ("90", S | M | L), ("135", L)],
        fallback: "0",
    },
    VariableRow {
        name: THERMAL_MASS,
        element: ElementTag::Fabric,
        field: FieldTag::Architecture,
        options: &[("LW", ALL), ("HW", ALL)],
        fallback: "LW",
    },
    VariableRow {
        name: INSULATION,
        element: ElementTag::Fabric,
        field: FieldTag::Architecture,
        options: &[
            ("8.5", S | M | L),
            ("10.625", M | L),
            ("12.5", S | M | L),
            ("15.625", M | L),
            ("17", S | M | L),
        ],
        fallback: "8.5",
    },
    VariableRow {
        name: WINDOW,
        element: ElementTag::Fabric,
        field: FieldTag::Architecture,
        options: &[("Double clear", ALL), ("Triple clear", ALL), ("Triple LowE", S | M | L)],
        fallback: "Double clear",
    },
    VariableRow {
        name: DISTRIBUTION,
        element: ElementTag::Hvac,
        field: FieldTag::Engineering,
        options: &[("Radiant", ALL), ("Forced air", ALL)],
        fallback: "Radiant",
    },
    VariableRow {
        name: PLANT,
        element: ElementTag::Hvac,
        field: FieldTag::Engineering,
        options: &[("Boiler", ALL), ("Heat pump", ALL)],
        fallback: "Boiler",
    },
    VariableRow {
        name: SUPPLY_TEMP,
        element: ElementTag::Hvac,
        field: FieldTag::Engineering,
        options: &[
            ("30", S | M | L),
            ("35", M | L),
            ("40", S | M | L),
            ("45", M | L),
            ("50", S | M | L),
        ],
        fallback: "40",
    },
    VariableRow {
        name: SETPOINT,
        element: ElementTag::Controls,
        field: FieldTag::Engineering,
        options: &[
            ("18", S | M | L),
            ("19", V | M | L),
            ("20", S | L),
            ("21", V | M | L),
            ("22", S | L),
            ("23", V | M | L),
        ],
        fallback: "20",
    },
    VariableRow {
        name: SETBACK,
        element: ElementTag::Controls,
        field: FieldTag::Engineering,
        options: &[
            ("11", S | M | L),
            ("12", V | L),
            ("13", S | M | L),
            ("14", V | L),
            ("15", S | M | L),
            ("16", V | M | L),
        ],
        fallback: "13",
    },
];

/// Builds the case-study design space for a scale.
///
/// Variables without a marked option at a scale (orientation, insulation and
/// supply temperature at very small scale) are kept with their single
/// baseline option so every scale shares the same eleven variables.
pub fn make_case_study_space(scale: Scale) -> DesignSpace {
    let vars = TABLE
        .iter()
        .map(|row| {
            let mut options: Vec<&str> = row
                .options
                .iter()
                .filter(|(_, mask)| mask & scale.bit() != 0)
                .map(|(label, _)| *label)
                .collect();
            if options.is_empty() {
                options.push(row.fallback);
            }
            VariableSpec::new(row.name, options, row.element, row.field)
        })
        .collect();
    let space = DesignSpace::new(vars).expect("case-study table is well formed");
    let count = space.combination_count();
    if count != scale.quoted_design_options() as u128 {
        log::info!(
            "case-study {scale} space has {count} combinations (quoted: {})",
            scale.quoted_design_options()
        );
    }
    space
}

/// Starting bounds matching the case-study starting-point table.
///
/// `Middle` pins orientation 90°, heavyweight mass and heat pump, where the
/// table departs from the ⌊(m−1)/2⌋ rule. `Explicit` returns the table's
/// "random" column as a fixed vector (requires the large-scale options).
pub fn case_study_bound(space: &DesignSpace, policy: BoundPolicy, seed: u64) -> Result<StartingBound> {
    let pin = |bound: StartingBound, var: &str, label: &str| -> Result<StartingBound> {
        let pos = space.require_position(var)?;
        match space.variable(pos).option_index(label) {
            Some(i) => Ok(bound.with_override(var, i)),
            None => Ok(bound),
        }
    };
    match policy {
        BoundPolicy::Middle => {
            let b = StartingBound::middle();
            let b = pin(b, ORIENTATION, "90")?;
            let b = pin(b, THERMAL_MASS, "HW")?;
            pin(b, PLANT, "Heat pump")
        }
        BoundPolicy::Explicit => {
            let column = [
                (SHAPE, "Free form"),
                (WWR, "75"),
                (ORIENTATION, "0"),
                (THERMAL_MASS, "LW"),
                (INSULATION, "10.625"),
                (WINDOW, "Triple clear"),
                (DISTRIBUTION, "Radiant"),
                (PLANT, "Boiler"),
                (SUPPLY_TEMP, "45"),
                (SETPOINT, "21"),
                (SETBACK, "15"),
            ];
            let mut b = StartingBound::new(BoundPolicy::Explicit);
            for (var, label) in column {
                let pos = space.require_position(var)?;
                let idx = space.variable(pos).option_index(label).ok_or_else(|| {
                    Error::UnknownOption {
                        variable: var.to_string(),
                        label: label.to_string(),
                    }
                })?;
                b = b.with_override(var, idx);
            }
            Ok(b)
        }
        BoundPolicy::Random => Ok(StartingBound::random(seed)),
        other => Ok(StartingBound::new(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::GroupingScheme;

    #[test]
    fn scale_products() {
        assert_eq!(make_case_study_space(Scale::Large).combination_count(), 1_036_800);
        assert_eq!(make_case_study_space(Scale::Medium).combination_count(), 345_600);
        // Table column products; the quoted 52,400 and 874 are not products.
        assert_eq!(make_case_study_space(Scale::Small).combination_count(), 52_488);
        assert_eq!(make_case_study_space(Scale::VerySmall).combination_count(), 864);
    }

    #[test]
    fn every_scale_has_eleven_valid_variables() {
        for scale in Scale::ALL {
            let s = make_case_study_space(scale);
            assert_eq!(s.len(), 11);
            assert!(s.validate().is_ok());
        }
    }

    #[test]
    fn field_stage_one_on_large() {
        let s = make_case_study_space(Scale::Large);
        let g = GroupingScheme::field_grouped(&s);
        assert_eq!(g.stage_count(), 2);
        assert_eq!(s.group_count(&g.stages()[0]), 1_440);
        assert_eq!(s.group_count(&g.stages()[1]), 720);
        let e = GroupingScheme::element_grouped(&s);
        assert_eq!(e.stage_count(), 4);
    }

    fn labels(space: &DesignSpace, bound: &StartingBound) -> Vec<String> {
        let v = space.resolve_bound(bound).unwrap();
        space.labels(&v).into_iter().map(String::from).collect()
    }

    #[test]
    fn starting_bound_columns_on_large() {
        let s = make_case_study_space(Scale::Large);
        let low = case_study_bound(&s, BoundPolicy::Low, 0).unwrap();
        assert_eq!(
            labels(&s, &low),
            [
                "Rectangle", "25", "0", "LW", "8.5", "Double clear", "Radiant", "Boiler", "30",
                "18", "11"
            ]
        );
        let up = case_study_bound(&s, BoundPolicy::Upper, 0).unwrap();
        assert_eq!(
            labels(&s, &up),
            [
                "Free form", "95", "135", "HW", "17", "Triple LowE", "Forced air", "Heat pump",
                "50", "23", "16"
            ]
        );
        let mid = case_study_bound(&s, BoundPolicy::Middle, 0).unwrap();
        assert_eq!(
            labels(&s, &mid),
            [
                "L-shape", "50", "90", "HW", "12.5", "Triple clear", "Radiant", "Heat pump", "40",
                "20", "13"
            ]
        );
        let rd = case_study_bound(&s, BoundPolicy::Explicit, 0).unwrap();
        assert_eq!(
            labels(&s, &rd),
            [
                "Free form", "75", "0", "LW", "10.625", "Triple clear", "Radiant", "Boiler", "45",
                "21", "15"
            ]
        );
    }
}
