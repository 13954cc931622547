//! Closed-form building surrogate: annual heating energy (kWh/year) and
//! occupied discomfort hours (h/year) for the case-study variables.
//!
//! The coefficient table is benchmark definition, not measured physics. It
//! couples elements on purpose (glazing ratio × window type, supply
//! temperature × plant and distribution, thermal mass × setback) so staged
//! search is not trivially exact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveVector};
use crate::case_study::{
    DISTRIBUTION, INSULATION, ORIENTATION, PLANT, SETBACK, SETPOINT, SHAPE, SUPPLY_TEMP,
    THERMAL_MASS, WINDOW, WWR,
};
use crate::error::{Error, Result};
use crate::space::{DesignSpace, DesignVector};

const DEFAULT_COEFFICIENTS: &str = include_str!("../../data/surrogate-v1.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowCoefficients {
    /// W/m²K
    pub u_value: f64,
    pub solar_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassCoefficients {
    pub energy_multiplier: f64,
    pub pickup_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionCoefficients {
    /// Energy factor at `reference_supply`.
    pub base: f64,
    /// Change of the energy factor per °C of supply temperature.
    pub supply_slope: f64,
    pub reference_supply: f64,
    /// Morning pick-up discomfort multiplier.
    pub pickup: f64,
    /// Relative pick-up penalty per °C below `reference_supply`.
    pub pickup_supply_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantCoefficients {
    /// Efficiency (boiler) or COP (heat pump) at `reference_supply`.
    pub efficiency: f64,
    /// Loss of efficiency per °C above `reference_supply`.
    pub efficiency_slope: f64,
    pub reference_supply: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClimateConstants {
    pub occupied_hours: f64,
    pub unoccupied_hours: f64,
    /// Mean outdoor temperature over the heating season, °C.
    pub mean_outdoor_temp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComfortConstants {
    pub base_hours: f64,
    pub cold_coefficient: f64,
    pub warm_coefficient: f64,
    pub reference_temp: f64,
    pub pickup_coefficient: f64,
    pub pickup_temp: f64,
    pub draught_coefficient: f64,
    pub reference_window_u: f64,
}

/// Versioned coefficient table for [`Surrogate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateCoefficients {
    pub version: String,
    /// Opaque + glazed facade area, m².
    pub envelope_area_m2: f64,
    pub roof_area_m2: f64,
    /// Wall resistance excluding insulation, m²K/W.
    pub wall_base_resistance: f64,
    pub roof_base_resistance: f64,
    /// W/mK; insulation thickness options are in cm.
    pub insulation_conductivity: f64,
    /// Ventilation and infiltration conductance, W/K.
    pub ventilation_conductance: f64,
    /// Annual useful solar gain through a fully glazed facade with g = 1, kWh.
    pub solar_gain_kwh: f64,
    pub internal_gain_kwh: f64,
    pub windows: BTreeMap<String, WindowCoefficients>,
    /// Solar factor by shape, then orientation label.
    pub orientation_factors: BTreeMap<String, BTreeMap<String, f64>>,
    pub mass: BTreeMap<String, MassCoefficients>,
    pub distribution: BTreeMap<String, DistributionCoefficients>,
    pub plants: BTreeMap<String, PlantCoefficients>,
    pub climate: ClimateConstants,
    pub comfort: ComfortConstants,
}

impl Default for SurrogateCoefficients {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_COEFFICIENTS).expect("shipped coefficient table parses")
    }
}

impl SurrogateCoefficients {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Copy)]
struct Roles {
    shape: usize,
    wwr: usize,
    orientation: usize,
    mass: usize,
    insulation: usize,
    window: usize,
    distribution: usize,
    plant: usize,
    supply: usize,
    setpoint: usize,
    setback: usize,
}

/// Surrogate bound to a space: option labels are resolved to coefficients
/// once, at construction.
#[derive(Debug, Clone)]
pub struct Surrogate {
    coeffs: SurrogateCoefficients,
    roles: Roles,
    glazing_ratio: Vec<f64>,
    windows: Vec<WindowCoefficients>,
    u_wall: Vec<f64>,
    u_roof: Vec<f64>,
    /// `[shape][orientation]`
    solar: Vec<Vec<f64>>,
    mass: Vec<MassCoefficients>,
    distribution: Vec<DistributionCoefficients>,
    plants: Vec<PlantCoefficients>,
    supply: Vec<f64>,
    setpoint: Vec<f64>,
    setback: Vec<f64>,
}

fn numeric_options(space: &DesignSpace, pos: usize) -> Result<Vec<f64>> {
    let var = space.variable(pos);
    var.options
        .iter()
        .map(|o| {
            o.trim().parse::<f64>().map_err(|_| {
                Error::MissingCoefficient(format!(
                    "option `{o}` of `{}` is not numeric",
                    var.name
                ))
            })
        })
        .collect()
}

fn lookup<T: Clone>(
    table: &BTreeMap<String, T>,
    space: &DesignSpace,
    pos: usize,
) -> Result<Vec<T>> {
    let var = space.variable(pos);
    var.options
        .iter()
        .map(|o| {
            table
                .get(o)
                .cloned()
                .ok_or_else(|| Error::MissingCoefficient(format!("`{}` option `{o}`", var.name)))
        })
        .collect()
}

impl Surrogate {
    pub fn new(coeffs: SurrogateCoefficients, space: &DesignSpace) -> Result<Self> {
        let pos = |name: &str| {
            space
                .position(name)
                .ok_or_else(|| Error::MissingCoefficient(format!("variable `{name}` not in space")))
        };
        let roles = Roles {
            shape: pos(SHAPE)?,
            wwr: pos(WWR)?,
            orientation: pos(ORIENTATION)?,
            mass: pos(THERMAL_MASS)?,
            insulation: pos(INSULATION)?,
            window: pos(WINDOW)?,
            distribution: pos(DISTRIBUTION)?,
            plant: pos(PLANT)?,
            supply: pos(SUPPLY_TEMP)?,
            setpoint: pos(SETPOINT)?,
            setback: pos(SETBACK)?,
        };
        let glazing_ratio: Vec<f64> = numeric_options(space, roles.wwr)?
            .into_iter()
            .map(|p| p / 100.0)
            .collect();
        let thickness_m: Vec<f64> = numeric_options(space, roles.insulation)?
            .into_iter()
            .map(|cm| cm / 100.0)
            .collect();
        let k = coeffs.insulation_conductivity;
        let u_wall = thickness_m
            .iter()
            .map(|t| 1.0 / (coeffs.wall_base_resistance + t / k))
            .collect();
        let u_roof = thickness_m
            .iter()
            .map(|t| 1.0 / (coeffs.roof_base_resistance + t / k))
            .collect();
        let shape_var = space.variable(roles.shape);
        let orient_var = space.variable(roles.orientation);
        let solar = shape_var
            .options
            .iter()
            .map(|shape| {
                let row = coeffs.orientation_factors.get(shape).ok_or_else(|| {
                    Error::MissingCoefficient(format!("orientation factors for shape `{shape}`"))
                })?;
                orient_var
                    .options
                    .iter()
                    .map(|o| {
                        row.get(o).copied().ok_or_else(|| {
                            Error::MissingCoefficient(format!(
                                "orientation factor for `{shape}` at `{o}`"
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let surrogate = Surrogate {
            windows: lookup(&coeffs.windows, space, roles.window)?,
            mass: lookup(&coeffs.mass, space, roles.mass)?,
            distribution: lookup(&coeffs.distribution, space, roles.distribution)?,
            plants: lookup(&coeffs.plants, space, roles.plant)?,
            supply: numeric_options(space, roles.supply)?,
            setpoint: numeric_options(space, roles.setpoint)?,
            setback: numeric_options(space, roles.setback)?,
            glazing_ratio,
            u_wall,
            u_roof,
            solar,
            roles,
            coeffs,
        };
        for plant in &surrogate.plants {
            for &t in &surrogate.supply {
                if plant_efficiency(plant, t) <= 0.0 {
                    return Err(Error::MissingCoefficient(format!(
                        "plant efficiency not positive at supply {t} °C"
                    )));
                }
            }
        }
        Ok(surrogate)
    }

    pub fn coefficients(&self) -> &SurrogateCoefficients {
        &self.coeffs
    }

    /// Envelope conductance UA in W/K for a glazing ratio, window and
    /// insulation option.
    pub fn envelope_conductance(&self, wwr: usize, window: usize, insulation: usize) -> f64 {
        let w = self.glazing_ratio[wwr];
        self.coeffs.envelope_area_m2
            * ((1.0 - w) * self.u_wall[insulation] + w * self.windows[window].u_value)
            + self.coeffs.roof_area_m2 * self.u_roof[insulation]
    }

    fn objectives(&self, v: &DesignVector) -> (f64, f64) {
        let r = &self.roles;
        let c = &self.coeffs;
        let w = self.glazing_ratio[v.get(r.wwr)];
        let window = &self.windows[v.get(r.window)];
        let ua = self.envelope_conductance(v.get(r.wwr), v.get(r.window), v.get(r.insulation));
        let t_set = self.setpoint[v.get(r.setpoint)];
        let t_sb = self.setback[v.get(r.setback)];
        let t_sup = self.supply[v.get(r.supply)];
        let t_out = c.climate.mean_outdoor_temp;
        let hdh = c.climate.occupied_hours * (t_set - t_out).max(0.0)
            + c.climate.unoccupied_hours * (t_sb - t_out).max(0.0);
        let solar = self.solar[v.get(r.shape)][v.get(r.orientation)];
        let q = ((ua + c.ventilation_conductance) * hdh / 1000.0
            - c.solar_gain_kwh * w * solar * window.solar_factor
            - c.internal_gain_kwh)
            .max(0.0);
        let mass = &self.mass[v.get(r.mass)];
        let dist = &self.distribution[v.get(r.distribution)];
        let plant = &self.plants[v.get(r.plant)];
        let dist_factor = dist.base + dist.supply_slope * (t_sup - dist.reference_supply);
        let energy = q * mass.energy_multiplier * dist_factor / plant_efficiency(plant, t_sup);

        let k = &c.comfort;
        let dist_pick =
            dist.pickup * (1.0 + dist.pickup_supply_slope * (dist.reference_supply - t_sup).max(0.0));
        let discomfort = k.base_hours
            * (1.0
                + k.cold_coefficient * (k.reference_temp - t_set).max(0.0).powi(2)
                + k.warm_coefficient * (t_set - k.reference_temp).max(0.0))
            + k.pickup_coefficient * (k.pickup_temp - t_sb).max(0.0) * mass.pickup_multiplier * dist_pick
            + k.draught_coefficient * w * (window.u_value / k.reference_window_u);
        (energy, discomfort)
    }
}

fn plant_efficiency(plant: &PlantCoefficients, t_sup: f64) -> f64 {
    plant.efficiency - plant.efficiency_slope * (t_sup - plant.reference_supply)
}

impl Objective for Surrogate {
    fn n_objectives(&self) -> usize {
        2
    }

    fn objective_names(&self) -> Vec<String> {
        vec!["energy_kwh".into(), "discomfort_h".into()]
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
        let (e, d) = self.objectives(v);
        Ok(ObjectiveVector::new(vec![e, d]))
    }
}
