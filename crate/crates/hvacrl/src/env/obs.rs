//! Observation vectors and their variable specifications.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObsError {
    #[error("observation group filter must include the Env group")]
    EnvGroupMissing,
    #[error("observation has {got} values but the spec lists {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Ablation category of an observation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarGroup {
    /// Outdoor conditions plus zone temperatures and humidities.
    Env,
    /// Total HVAC electric demand.
    Energy,
    /// Thermostat setpoint variables.
    Action,
    /// Occupant counts and comfort-proxy variables.
    Aux,
}

impl VarGroup {
    pub const ALL: [VarGroup; 4] = [
        VarGroup::Env,
        VarGroup::Energy,
        VarGroup::Action,
        VarGroup::Aux,
    ];
}

impl std::fmt::Display for VarGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VarGroup::Env => "Env",
            VarGroup::Energy => "Energy",
            VarGroup::Action => "Action",
            VarGroup::Aux => "Aux",
        };
        f.write_str(s)
    }
}

/// What an observation slot reads from the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObsSource {
    OutdoorTemp,
    OutdoorHumidity,
    WindSpeed,
    WindDirection,
    DiffuseSolar,
    DirectSolar,
    ZoneTemp(usize),
    ZoneHumidity(usize),
    HeatingSetpoint(usize),
    CoolingSetpoint(usize),
    OccupantCount(usize),
    /// Comfort proxy: mean radiant temperature, taken as zone air temperature.
    MeanRadiantTemp(usize),
    /// Comfort proxy: clothing value, a constant 0.5.
    ClothingValue(usize),
    /// Comfort proxy: Fanger-style PPD, `clamp(100 |T_z - 23| / 10, 0, 100)`.
    FangerPpd(usize),
    /// Comfort proxy: people air temperature, taken as zone air temperature.
    PeopleAirTemp(usize),
    TotalPower,
}

/// One observation variable: name, unit, ablation group, and the min-max
/// normalization range used by the network agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsVar {
    pub name: String,
    pub unit: String,
    pub group: VarGroup,
    pub lo: f64,
    pub hi: f64,
    pub source: ObsSource,
}

/// Ordered list of observation variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    vars: Vec<ObsVar>,
}

/// A value vector aligned with an [`ObservationSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: Vec<f64>,
}

fn var(
    name: &str,
    unit: &str,
    group: VarGroup,
    lo: f64,
    hi: f64,
    source: ObsSource,
) -> ObsVar {
    ObsVar {
        name: name.to_string(),
        unit: unit.to_string(),
        group,
        lo,
        hi,
        source,
    }
}

fn outdoor_vars() -> Vec<ObsVar> {
    use ObsSource::*;
    use VarGroup::Env;
    vec![
        var("t_out", "degC", Env, -30.0, 50.0, OutdoorTemp),
        var("h_out", "%", Env, 0.0, 100.0, OutdoorHumidity),
        var("v_out", "m/s", Env, 0.0, 30.0, WindSpeed),
        var("w_out", "deg", Env, 0.0, 360.0, WindDirection),
        var("s_diffuse", "W/m2", Env, 0.0, 1200.0, DiffuseSolar),
        var("s_direct", "W/m2", Env, 0.0, 1200.0, DirectSolar),
    ]
}

impl ObservationSpec {
    /// Warehouse observation layout: outdoor block, then office, fine
    /// storage, and heat-only bulk storage blocks, then total power.
    pub fn warehouse() -> Self {
        use ObsSource::*;
        let mut vars = outdoor_vars();
        let zone_block = |vars: &mut Vec<ObsVar>, tag: &str, z: usize, cooled: bool| {
            vars.push(var(
                &format!("t_{tag}_hs"),
                "degC",
                VarGroup::Action,
                15.0,
                30.0,
                HeatingSetpoint(z),
            ));
            if cooled {
                vars.push(var(
                    &format!("t_{tag}_cs"),
                    "degC",
                    VarGroup::Action,
                    15.0,
                    30.0,
                    CoolingSetpoint(z),
                ));
            }
            vars.push(var(
                &format!("t_{tag}"),
                "degC",
                VarGroup::Env,
                -5.0,
                50.0,
                ZoneTemp(z),
            ));
            vars.push(var(
                &format!("h_{tag}"),
                "%",
                VarGroup::Env,
                0.0,
                100.0,
                ZoneHumidity(z),
            ));
        };
        zone_block(&mut vars, "office", 0, true);
        vars.push(var(
            "c_office",
            "people",
            VarGroup::Aux,
            0.0,
            20.0,
            ObsSource::OccupantCount(0),
        ));
        zone_block(&mut vars, "fs", 1, true);
        zone_block(&mut vars, "bs", 2, false);
        vars.push(var(
            "p_total",
            "W",
            VarGroup::Energy,
            0.0,
            250_000.0,
            TotalPower,
        ));
        Self { vars }
    }

    /// Datacenter observation layout: outdoor block, then the west and east
    /// zone blocks with comfort proxies, then total power.
    pub fn datacenter() -> Self {
        use ObsSource::*;
        let mut vars = outdoor_vars();
        let zone_block = |vars: &mut Vec<ObsVar>, tag: &str, z: usize| {
            vars.push(var(
                &format!("t_{tag}_hs"),
                "degC",
                VarGroup::Action,
                15.0,
                30.0,
                HeatingSetpoint(z),
            ));
            vars.push(var(
                &format!("t_{tag}_cs"),
                "degC",
                VarGroup::Action,
                15.0,
                30.0,
                CoolingSetpoint(z),
            ));
            vars.push(var(
                &format!("t_{tag}"),
                "degC",
                VarGroup::Env,
                -5.0,
                50.0,
                ZoneTemp(z),
            ));
            vars.push(var(
                &format!("t_{tag}_cmr"),
                "degC",
                VarGroup::Aux,
                -5.0,
                50.0,
                MeanRadiantTemp(z),
            ));
            vars.push(var(
                &format!("h_{tag}"),
                "%",
                VarGroup::Env,
                0.0,
                100.0,
                ZoneHumidity(z),
            ));
            vars.push(var(
                &format!("t_{tag}_ccv"),
                "clo",
                VarGroup::Aux,
                0.0,
                1.0,
                ClothingValue(z),
            ));
            vars.push(var(
                &format!("t_{tag}_cfm"),
                "%",
                VarGroup::Aux,
                0.0,
                100.0,
                FangerPpd(z),
            ));
            vars.push(var(
                &format!("c_{tag}"),
                "people",
                VarGroup::Aux,
                0.0,
                20.0,
                OccupantCount(z),
            ));
            vars.push(var(
                &format!("t_{tag}_pa"),
                "degC",
                VarGroup::Aux,
                -5.0,
                50.0,
                PeopleAirTemp(z),
            ));
        };
        zone_block(&mut vars, "wz", 0);
        zone_block(&mut vars, "ez", 1);
        vars.push(var(
            "p_total",
            "W",
            VarGroup::Energy,
            0.0,
            50_000.0,
            TotalPower,
        ));
        Self { vars }
    }

    pub fn vars(&self) -> &[ObsVar] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Indices of variables whose group is in `groups`, original order.
    pub fn group_indices(&self, groups: &[VarGroup]) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| groups.contains(&v.group))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-spec with only the variables whose group is in `groups`.
    pub fn filter(&self, groups: &[VarGroup]) -> Result<ObservationSpec, ObsError> {
        if !groups.contains(&VarGroup::Env) {
            return Err(ObsError::EnvGroupMissing);
        }
        Ok(ObservationSpec {
            vars: self
                .group_indices(groups)
                .into_iter()
                .map(|i| self.vars[i].clone())
                .collect(),
        })
    }
}

/// Projects an observation onto the variables whose group is in `groups`,
/// returning the sub-vector together with the matching sub-spec.
pub fn filter_observation(
    obs: &Observation,
    spec: &ObservationSpec,
    groups: &[VarGroup],
) -> Result<(Observation, ObservationSpec), ObsError> {
    if obs.values.len() != spec.len() {
        return Err(ObsError::LengthMismatch {
            got: obs.values.len(),
            expected: spec.len(),
        });
    }
    let sub_spec = spec.filter(groups)?;
    let values = spec
        .group_indices(groups)
        .into_iter()
        .map(|i| obs.values[i])
        .collect();
    Ok((Observation { values }, sub_spec))
}
