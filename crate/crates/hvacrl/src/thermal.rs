//! Desk-scale multi-zone building simulator: one thermal node per zone,
//! lumped capacitance and conductances, a proportional setpoint thermostat
//! saturated at plant capacity, and a cumulative electric energy meter.
//!
//! Each zone obeys
//!
//! ```text
//! C_z dT_z/dt = U_z (T_out - T_z) + sum_j K_zj (T_j - T_z) + q_z + gains_z
//! ```
//!
//! where `q_z` is the thermostat's thermal power (heating positive, cooling
//! negative). A step of duration `dt` is integrated in sub-steps of at most
//! 60 s; the conductive terms use the trapezoidal (theta = 1/2) semi-implicit
//! update, which is unconditionally stable and second-order accurate, while
//! `q_z` and the gains are held at their start-of-sub-step values. Zone
//! humidity relaxes toward outdoor humidity with a 3 h time constant.
//!
//! Electric power is thermal power divided by the COP of the active mode,
//! plus a 50 W fan load per zone whenever its HVAC is running.

use crate::weather::WeatherRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integration sub-step ceiling, seconds.
pub const SUBSTEP_S: f64 = 60.0;
/// Fan electric draw per zone while its HVAC delivers thermal power, W.
pub const FAN_POWER_W: f64 = 50.0;
/// Zone humidity relaxation time constant, seconds.
pub const RH_TAU_S: f64 = 3.0 * 3600.0;

#[derive(Debug, Error)]
pub enum ThermalError {
    #[error("setpoint command has {cmd} zones but the model has {model}")]
    ZoneCountMismatch { cmd: usize, model: usize },
    #[error("step duration must be positive, got {dt}")]
    NonPositiveDt { dt: f64 },
    #[error("interzone matrix must be symmetric {n}x{n} with zero diagonal and nonnegative couplings")]
    BadInterzoneMatrix { n: usize },
    #[error("heating setpoint {heating} exceeds cooling setpoint {cooling} for zone {zone}")]
    SetpointsInverted {
        zone: usize,
        heating: f64,
        cooling: f64,
    },
}

/// Static thermal and plant parameters of one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    pub name: String,
    /// Thermal capacitance, J/K.
    pub capacitance: f64,
    /// Conductance to outdoors, W/K.
    pub envelope_conductance: f64,
    /// Maximum thermal heating power, W.
    pub heat_capacity: f64,
    /// Maximum thermal cooling power, W; 0 for heat-only zones.
    pub cool_capacity: f64,
    /// Heating coefficient of performance.
    pub cop_heat: f64,
    /// Cooling coefficient of performance.
    pub cop_cool: f64,
    /// Always-on internal gain, W.
    pub internal_gain_base: f64,
    /// Additional gain per occupant, W.
    pub occupant_gain: f64,
    /// Proportional thermostat gain, W/K of setpoint error.
    pub controller_gain: f64,
}

/// Weekly occupancy pattern for one zone: `count` people during
/// `[start_hour, end_hour)` on weekdays, zero otherwise. Hour-of-week 0 is
/// Monday 00:00.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneOccupancy {
    pub weekday_start_hour: u32,
    pub weekday_end_hour: u32,
    pub count: f64,
}

impl ZoneOccupancy {
    pub const fn empty() -> Self {
        Self {
            weekday_start_hour: 0,
            weekday_end_hour: 0,
            count: 0.0,
        }
    }

    /// People present at the given hour of the week (0..168).
    pub fn occupants(&self, hour_of_week: u32) -> f64 {
        let day = hour_of_week / 24;
        let hour = hour_of_week % 24;
        if day < 5 && hour >= self.weekday_start_hour && hour < self.weekday_end_hour {
            self.count
        } else {
            0.0
        }
    }
}

/// A building: zone parameters, symmetric interzone conductances, and
/// per-zone occupancy schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub zones: Vec<ZoneParams>,
    /// Row-major n x n conductance matrix, W/K.
    interzone: Vec<f64>,
    pub occupancy: Vec<ZoneOccupancy>,
}

impl BuildingModel {
    pub fn new(
        zones: Vec<ZoneParams>,
        interzone: Vec<f64>,
        occupancy: Vec<ZoneOccupancy>,
    ) -> Result<Self, ThermalError> {
        let n = zones.len();
        let ok = interzone.len() == n * n
            && occupancy.len() == n
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    let k = interzone[i * n + j];
                    k >= 0.0 && k == interzone[j * n + i] && (i != j || k == 0.0)
                })
            });
        if !ok {
            return Err(ThermalError::BadInterzoneMatrix { n });
        }
        Ok(Self {
            zones,
            interzone,
            occupancy,
        })
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    /// Conductance between zones `i` and `j`, W/K.
    pub fn interzone_conductance(&self, i: usize, j: usize) -> f64 {
        self.interzone[i * self.zones.len() + j]
    }

    /// Occupant count per zone at a simulation time in seconds from the
    /// series start (taken as Monday 00:00).
    pub fn occupants_at(&self, sim_time: f64) -> Vec<f64> {
        let hour_of_week = ((sim_time / 3600.0).floor() as u64 % 168) as u32;
        self.occupancy
            .iter()
            .map(|o| o.occupants(hour_of_week))
            .collect()
    }

    /// Initial state with the given zone temperatures, 50 % RH everywhere,
    /// an empty energy meter, and the clock at zero.
    pub fn initial_state(&self, zone_temps: Vec<f64>) -> BuildingState {
        let n = self.zone_count();
        assert_eq!(zone_temps.len(), n, "one initial temperature per zone");
        BuildingState {
            zone_temps,
            zone_rh: vec![50.0; n],
            energy_meter: 0.0,
            sim_time: 0.0,
        }
    }

    /// Advances the building by `dt` seconds under fixed outdoor conditions
    /// and a setpoint command, returning the next state and the average
    /// electric power drawn over the step.
    pub fn step(
        &self,
        state: &BuildingState,
        weather: &WeatherRecord,
        cmd: &SetpointCommand,
        dt: f64,
    ) -> Result<(BuildingState, f64), ThermalError> {
        if dt <= 0.0 {
            return Err(ThermalError::NonPositiveDt { dt });
        }
        let n = self.zone_count();
        if cmd.zones.len() != n {
            return Err(ThermalError::ZoneCountMismatch {
                cmd: cmd.zones.len(),
                model: n,
            });
        }
        cmd.validate()?;

        let n_sub = (dt / SUBSTEP_S).ceil() as usize;
        let h = dt / n_sub as f64;

        let mut temps = state.zone_temps.clone();
        let mut rh = state.zone_rh.clone();
        let mut sim_time = state.sim_time;
        let mut electric_j = 0.0;

        // The conductive part is linear with a constant matrix, so the
        // trapezoidal system matrix can be factored once per step.
        let mut lhs = vec![0.0; n * n];
        for z in 0..n {
            let c = self.zones[z].capacitance;
            let mut degree = self.zones[z].envelope_conductance;
            for j in 0..n {
                if j != z {
                    let k = self.interzone[z * n + j];
                    degree += k;
                    lhs[z * n + j] = -0.5 * k;
                }
            }
            lhs[z * n + z] = c / h + 0.5 * degree;
        }
        let lu = LuFactors::factor(lhs, n);

        let rh_decay = (-h / RH_TAU_S).exp();

        for _ in 0..n_sub {
            let occupants = self.occupants_at(sim_time);
            let mut rhs = vec![0.0; n];
            for z in 0..n {
                let p = &self.zones[z];
                let t = temps[z];
                let (q_heat, q_cool) = cmd.zones[z].thermal_power(p, t);
                if q_heat > 0.0 || q_cool > 0.0 {
                    electric_j +=
                        (q_heat / p.cop_heat + q_cool / p.cop_cool + FAN_POWER_W) * h;
                }
                let gains = p.internal_gain_base + p.occupant_gain * occupants[z];
                let mut degree = p.envelope_conductance;
                let mut coupled = 0.0;
                for j in 0..n {
                    if j != z {
                        let k = self.interzone[z * n + j];
                        degree += k;
                        coupled += k * temps[j];
                    }
                }
                rhs[z] = (p.capacitance / h - 0.5 * degree) * t
                    + 0.5 * coupled
                    + p.envelope_conductance * weather.t_out
                    + q_heat
                    - q_cool
                    + gains;
            }
            temps = lu.solve(&rhs);
            for z in 0..n {
                rh[z] = weather.h_out + (rh[z] - weather.h_out) * rh_decay;
            }
            sim_time += h;
        }

        let p_total = electric_j / dt;
        Ok((
            BuildingState {
                zone_temps: temps,
                zone_rh: rh,
                energy_meter: state.energy_meter + electric_j,
                sim_time,
            },
            p_total,
        ))
    }
}

/// Evolving simulation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingState {
    /// Per-zone air temperature, degC.
    pub zone_temps: Vec<f64>,
    /// Per-zone relative humidity, %.
    pub zone_rh: Vec<f64>,
    /// Cumulative electric energy, J.
    pub energy_meter: f64,
    /// Seconds since the episode start.
    pub sim_time: f64,
}

/// Per-zone thermostat setpoints; `cooling` is `None` for heat-only zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneSetpoint {
    pub heating: f64,
    pub cooling: Option<f64>,
}

impl ZoneSetpoint {
    /// (heating, cooling) thermal power in W, both nonnegative, from the
    /// proportional controller clamped at plant capacity.
    fn thermal_power(&self, params: &ZoneParams, t: f64) -> (f64, f64) {
        let q_heat =
            (params.controller_gain * (self.heating - t)).clamp(0.0, params.heat_capacity);
        let q_cool = match self.cooling {
            Some(cs) if params.cool_capacity > 0.0 => {
                (params.controller_gain * (t - cs)).clamp(0.0, params.cool_capacity)
            }
            _ => 0.0,
        };
        (q_heat, q_cool)
    }
}

/// One setpoint per zone, in the model's zone order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetpointCommand {
    pub zones: Vec<ZoneSetpoint>,
}

impl SetpointCommand {
    pub fn new(zones: Vec<ZoneSetpoint>) -> Self {
        Self { zones }
    }

    fn validate(&self) -> Result<(), ThermalError> {
        for (zone, sp) in self.zones.iter().enumerate() {
            if let Some(cooling) = sp.cooling {
                if sp.heating > cooling {
                    return Err(ThermalError::SetpointsInverted {
                        zone,
                        heating: sp.heating,
                        cooling,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Dense LU with partial pivoting for the small per-step zone systems.
struct LuFactors {
    lu: Vec<f64>,
    pivots: Vec<usize>,
    n: usize,
}

impl LuFactors {
    fn factor(mut a: Vec<f64>, n: usize) -> Self {
        let mut pivots = vec![0; n];
        for k in 0..n {
            let mut pivot = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            pivots[k] = pivot;
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
            }
            let d = a[k * n + k];
            for r in (k + 1)..n {
                let f = a[r * n + k] / d;
                a[r * n + k] = f;
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
        Self { lu: a, pivots, n }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            for r in (k + 1)..n {
                x[r] -= self.lu[r * n + k] * x[k];
            }
        }
        for k in (0..n).rev() {
            for c in (k + 1)..n {
                x[k] -= self.lu[k * n + c] * x[c];
            }
            x[k] /= self.lu[k * n + k];
        }
        x
    }
}

/// Default three-zone warehouse: office, fine storage, and a heat-only bulk
/// storage zone. Capacitance is 200 kJ/K per m2 of floor area and envelope
/// conductance 1 W/K per m2, split over 500 / 1400 / 2698 m2.
pub fn warehouse_model() -> BuildingModel {
    let zone = |name: &str, area: f64, heat_w_m2: f64, cool_w_m2: f64, base: f64, gain: f64| {
        ZoneParams {
            name: name.to_string(),
            capacitance: 200_000.0 * area,
            envelope_conductance: 1.0 * area,
            heat_capacity: heat_w_m2 * area,
            cool_capacity: cool_w_m2 * area,
            cop_heat: 1.0,
            cop_cool: 3.0,
            internal_gain_base: base,
            occupant_gain: 120.0,
            controller_gain: gain,
        }
    };
    BuildingModel::new(
        vec![
            zone("office", 500.0, 50.0, 50.0, 1500.0, 10_000.0),
            zone("fine_storage", 1400.0, 40.0, 40.0, 2000.0, 20_000.0),
            zone("bulk_storage", 2698.0, 40.0, 0.0, 2000.0, 19_000.0),
        ],
        vec![
            0.0, 200.0, 80.0, //
            200.0, 0.0, 800.0, //
            80.0, 800.0, 0.0,
        ],
        vec![
            ZoneOccupancy {
                weekday_start_hour: 8,
                weekday_end_hour: 18,
                count: 10.0,
            },
            ZoneOccupancy {
                weekday_start_hour: 8,
                weekday_end_hour: 18,
                count: 2.0,
            },
            ZoneOccupancy {
                weekday_start_hour: 8,
                weekday_end_hour: 18,
                count: 1.0,
            },
        ],
    )
    .expect("warehouse defaults are valid")
}

/// Default two-zone datacenter. Each 245.65 m2 zone carries a constant
/// 10 kW IT load, so cooling dominates year round.
pub fn datacenter_model() -> BuildingModel {
    let zone = |name: &str| ZoneParams {
        name: name.to_string(),
        capacitance: 200_000.0 * 245.65,
        envelope_conductance: 1.0 * 245.65,
        heat_capacity: 10_000.0,
        cool_capacity: 25_000.0,
        cop_heat: 1.0,
        cop_cool: 3.0,
        internal_gain_base: 10_000.0,
        occupant_gain: 120.0,
        controller_gain: 5_000.0,
    };
    BuildingModel::new(
        vec![zone("west"), zone("east")],
        vec![
            0.0, 120.0, //
            120.0, 0.0,
        ],
        vec![
            ZoneOccupancy {
                weekday_start_hour: 8,
                weekday_end_hour: 18,
                count: 1.0,
            },
            ZoneOccupancy {
                weekday_start_hour: 8,
                weekday_end_hour: 18,
                count: 1.0,
            },
        ],
    )
    .expect("datacenter defaults are valid")
}
