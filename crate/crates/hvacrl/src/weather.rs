//! Outdoor weather: EPW ingestion, synthetic climate profiles, time
//! interpolation, and the chronological train/eval split.
//!
//! An EPW file is 8 header lines followed by hourly comma-separated data
//! rows. Only six columns are consumed here (0-indexed): 6 dry-bulb
//! temperature, 8 relative humidity, 14 direct normal radiation, 15 diffuse
//! horizontal radiation, 20 wind direction, 21 wind speed. Header metadata
//! beyond the location name is ignored.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// EPW data columns read by the parser, 0-indexed within a data row.
pub const EPW_COL_T_OUT: usize = 6;
/// Relative humidity column.
pub const EPW_COL_H_OUT: usize = 8;
/// Direct normal radiation column.
pub const EPW_COL_S_DIRECT: usize = 14;
/// Diffuse horizontal radiation column.
pub const EPW_COL_S_DIFFUSE: usize = 15;
/// Wind direction column.
pub const EPW_COL_W_OUT: usize = 20;
/// Wind speed column.
pub const EPW_COL_V_OUT: usize = 21;

const SENTINEL_T_OUT: f64 = 99.9;
const SENTINEL_H_OUT: f64 = 999.0;
const SENTINEL_RADIATION: f64 = 9999.0;
const SENTINEL_WIND_SPEED: f64 = 999.0;
const SENTINEL_WIND_DIR: f64 = 999.0;

#[derive(Debug, Error)]
pub enum WeatherError {
    #[error("EPW input must have 8 header lines and at least one data row")]
    TooFewHeaderLines,
    #[error("EPW data row {row} has fewer than 22 fields")]
    RowFieldCountBelow22 { row: usize },
    #[error("EPW data row {row}, column {col}: field is not numeric")]
    NonNumericField { row: usize, col: usize },
    #[error("sample time {t} s is outside [0, {max} s]")]
    TimeOutOfRange { t: f64, max: f64 },
    #[error("split would leave fewer than 2 records on one side")]
    DegenerateSplit,
    #[error("synthetic series needs at least 2 hours, got {hours}")]
    HoursTooSmall { hours: usize },
    #[error("weather series needs at least 2 records, got {n}")]
    SeriesTooShort { n: usize },
}

/// One hour of outdoor conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    /// Hours since the start of the series.
    pub hour_index: u32,
    /// Dry-bulb temperature, degC.
    pub t_out: f64,
    /// Relative humidity, % in [0, 100].
    pub h_out: f64,
    /// Wind speed, m/s, nonnegative.
    pub v_out: f64,
    /// Wind direction, degrees in [0, 360).
    pub w_out: f64,
    /// Diffuse horizontal radiation, W/m2, nonnegative.
    pub s_diffuse: f64,
    /// Direct normal radiation, W/m2, nonnegative.
    pub s_direct: f64,
}

/// Ordered hourly weather with consecutive hour indices starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    records: Vec<WeatherRecord>,
    pub location_label: String,
}

/// Chronological prefix/suffix split of a [`WeatherSeries`].
#[derive(Debug, Clone)]
pub struct WeatherSplit {
    pub train: WeatherSeries,
    pub eval: WeatherSeries,
    pub fraction: f64,
}

/// Built-in synthetic climates standing in for the two weather stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClimateProfile {
    /// Hot desert profile: annual mean 22 degC, seasonal amplitude 10,
    /// diurnal amplitude 8.
    Hot,
    /// Mediterranean profile: annual mean 10 degC, seasonal amplitude 7,
    /// diurnal amplitude 5.
    Cool,
}

impl WeatherSeries {
    /// Builds a series, re-indexing records consecutively from hour 0.
    pub fn new(
        mut records: Vec<WeatherRecord>,
        location_label: impl Into<String>,
    ) -> Result<Self, WeatherError> {
        if records.len() < 2 {
            return Err(WeatherError::SeriesTooShort { n: records.len() });
        }
        for (i, r) in records.iter_mut().enumerate() {
            r.hour_index = i as u32;
        }
        Ok(Self {
            records,
            location_label: location_label.into(),
        })
    }

    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    /// Number of hourly records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Last valid sample time in seconds: `3600 * (len - 1)`.
    pub fn max_time_s(&self) -> f64 {
        3600.0 * (self.records.len() as f64 - 1.0)
    }

    /// Outdoor conditions at `t` seconds since the series start.
    ///
    /// Temperature, humidity, wind speed, and both radiation terms are
    /// interpolated linearly between the bracketing hourly records; wind
    /// direction is taken from the nearer record since it wraps at 0/360.
    pub fn sample(&self, t: f64) -> Result<WeatherRecord, WeatherError> {
        let max = self.max_time_s();
        if !(0.0..=max).contains(&t) {
            return Err(WeatherError::TimeOutOfRange { t, max });
        }
        let hour = (t / 3600.0).floor() as usize;
        if hour >= self.records.len() - 1 {
            return Ok(self.records[self.records.len() - 1]);
        }
        let a = &self.records[hour];
        let b = &self.records[hour + 1];
        let frac = (t - 3600.0 * hour as f64) / 3600.0;
        let lerp = |x: f64, y: f64| x + frac * (y - x);
        Ok(WeatherRecord {
            hour_index: a.hour_index,
            t_out: lerp(a.t_out, b.t_out),
            h_out: lerp(a.h_out, b.h_out),
            v_out: lerp(a.v_out, b.v_out),
            w_out: if frac < 0.5 { a.w_out } else { b.w_out },
            s_diffuse: lerp(a.s_diffuse, b.s_diffuse),
            s_direct: lerp(a.s_direct, b.s_direct),
        })
    }

    /// Splits into a chronological train prefix and eval suffix.
    ///
    /// The train side gets `round(fraction * len)` records; the eval side is
    /// re-indexed from hour 0. Both sides must end up with at least 2
    /// records.
    pub fn split(&self, fraction: f64) -> Result<WeatherSplit, WeatherError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(WeatherError::DegenerateSplit);
        }
        let n = self.records.len();
        let n_train = (fraction * n as f64).round() as usize;
        if n_train < 2 || n - n_train < 2 {
            return Err(WeatherError::DegenerateSplit);
        }
        let train = WeatherSeries::new(
            self.records[..n_train].to_vec(),
            self.location_label.clone(),
        )?;
        let eval = WeatherSeries::new(
            self.records[n_train..].to_vec(),
            self.location_label.clone(),
        )?;
        Ok(WeatherSplit {
            train,
            eval,
            fraction,
        })
    }
}

/// Parses EPW text: 8 header lines, then one record per data row.
///
/// Missing-value sentinels (99.9 degC, 999 % RH, 9999 W/m2, 999 m/s,
/// 999 deg) are replaced with the previous record's value; for the first
/// record the fallbacks are 20 degC, 50 % RH, and 0 for radiation and wind.
pub fn parse_epw(text: &str) -> Result<WeatherSeries, WeatherError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.len() < 9 {
        return Err(WeatherError::TooFewHeaderLines);
    }
    let location_label = lines[0]
        .split(',')
        .nth(1)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "epw".to_string());

    let mut records: Vec<WeatherRecord> = Vec::with_capacity(lines.len() - 8);
    for (i, line) in lines[8..].iter().enumerate() {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 22 {
            return Err(WeatherError::RowFieldCountBelow22 { row });
        }
        let num = |col: usize| -> Result<f64, WeatherError> {
            fields[col]
                .trim()
                .parse::<f64>()
                .map_err(|_| WeatherError::NonNumericField { row, col })
        };
        let prev = records.last().copied();
        let fill = |raw: f64, sentinel: f64, last: Option<f64>, first_fallback: f64| -> f64 {
            if raw == sentinel {
                last.unwrap_or(first_fallback)
            } else {
                raw
            }
        };
        let t_out = fill(
            num(EPW_COL_T_OUT)?,
            SENTINEL_T_OUT,
            prev.map(|p| p.t_out),
            20.0,
        );
        let h_out = fill(
            num(EPW_COL_H_OUT)?,
            SENTINEL_H_OUT,
            prev.map(|p| p.h_out),
            50.0,
        )
        .clamp(0.0, 100.0);
        let s_direct = fill(
            num(EPW_COL_S_DIRECT)?,
            SENTINEL_RADIATION,
            prev.map(|p| p.s_direct),
            0.0,
        )
        .max(0.0);
        let s_diffuse = fill(
            num(EPW_COL_S_DIFFUSE)?,
            SENTINEL_RADIATION,
            prev.map(|p| p.s_diffuse),
            0.0,
        )
        .max(0.0);
        let w_out = fill(
            num(EPW_COL_W_OUT)?,
            SENTINEL_WIND_DIR,
            prev.map(|p| p.w_out),
            0.0,
        )
        .rem_euclid(360.0);
        let v_out = fill(
            num(EPW_COL_V_OUT)?,
            SENTINEL_WIND_SPEED,
            prev.map(|p| p.v_out),
            0.0,
        )
        .max(0.0);
        records.push(WeatherRecord {
            hour_index: row as u32 - 1,
            t_out,
            h_out,
            v_out,
            w_out,
            s_diffuse,
            s_direct,
        });
    }
    WeatherSeries::new(records, location_label)
}

struct ProfileParams {
    mean: f64,
    a_season: f64,
    a_day: f64,
    rh_base: f64,
    rh_swing: f64,
    direct_peak: f64,
    diffuse_peak: f64,
    wind_base: f64,
}

impl ClimateProfile {
    fn params(self) -> ProfileParams {
        match self {
            ClimateProfile::Hot => ProfileParams {
                mean: 22.0,
                a_season: 10.0,
                a_day: 8.0,
                rh_base: 35.0,
                rh_swing: 15.0,
                direct_peak: 900.0,
                diffuse_peak: 120.0,
                wind_base: 3.5,
            },
            ClimateProfile::Cool => ProfileParams {
                mean: 10.0,
                a_season: 7.0,
                a_day: 5.0,
                rh_base: 70.0,
                rh_swing: 15.0,
                direct_peak: 450.0,
                diffuse_peak: 180.0,
                wind_base: 4.5,
            },
        }
    }

    /// Label used by the CLI weather source syntax (`synthetic:hot`).
    pub fn label(self) -> &'static str {
        match self {
            ClimateProfile::Hot => "synthetic:hot",
            ClimateProfile::Cool => "synthetic:cool",
        }
    }
}

/// Generates an hourly synthetic weather series.
///
/// Temperature is an annual sine plus a diurnal sine plus seeded Gaussian
/// noise (sigma 1 degC); humidity swings against the diurnal term; solar
/// terms are daytime half-sines. The output is deterministic for a fixed
/// `(profile, seed, hours)` triple.
pub fn synthesize(
    profile: ClimateProfile,
    seed: u64,
    hours: usize,
) -> Result<WeatherSeries, WeatherError> {
    if hours < 2 {
        return Err(WeatherError::HoursTooSmall { hours });
    }
    let p = profile.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let mut wind_dir: f64 = 180.0;
    let mut records = Vec::with_capacity(hours);
    for h in 0..hours {
        let seasonal = (2.0 * PI * h as f64 / 8760.0 - PI / 2.0).sin();
        let diurnal = (2.0 * PI * (h % 24) as f64 / 24.0 - PI / 2.0).sin();
        let t_out = p.mean + p.a_season * seasonal + p.a_day * diurnal + noise.sample(&mut rng);
        let h_out = (p.rh_base - p.rh_swing * diurnal + 5.0 * noise.sample(&mut rng))
            .clamp(10.0, 100.0);
        let hour_of_day = (h % 24) as f64;
        let elevation = (PI * (hour_of_day - 6.0) / 12.0).sin().max(0.0);
        let s_direct = p.direct_peak * elevation;
        let s_diffuse = p.diffuse_peak * elevation;
        let v_out = (p.wind_base + 1.5 * diurnal + noise.sample(&mut rng)).max(0.0);
        wind_dir = (wind_dir + 25.0 * noise.sample(&mut rng)).rem_euclid(360.0);
        records.push(WeatherRecord {
            hour_index: h as u32,
            t_out,
            h_out,
            v_out,
            w_out: wind_dir,
            s_diffuse,
            s_direct,
        });
    }
    WeatherSeries::new(records, profile.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn epw_text(n_headers: usize, rows: &[&str]) -> String {
        let mut s = String::new();
        for i in 0..n_headers {
            s.push_str(&format!("HEADER{i},data,ignored\n"));
        }
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    // 22-field row with the mapped columns set and filler zeros elsewhere.
    fn row(t: f64, h: f64, dir: f64, dif: f64, w: f64, v: f64) -> String {
        let mut f = vec!["0".to_string(); 22];
        f[0] = "1987".into();
        f[EPW_COL_T_OUT] = t.to_string();
        f[EPW_COL_H_OUT] = h.to_string();
        f[EPW_COL_S_DIRECT] = dir.to_string();
        f[EPW_COL_S_DIFFUSE] = dif.to_string();
        f[EPW_COL_W_OUT] = w.to_string();
        f[EPW_COL_V_OUT] = v.to_string();
        f.join(",")
    }

    #[test]
    fn parses_mapped_columns() {
        // Mirrors the published EPW column layout; unmapped fields are
        // arbitrary numerics.
        let text = epw_text(
            8,
            &[
                "1987,1,1,1,0,0,12.5,0,80,0,0,0,0,0,300,150,0,0,0,0,180,4.0",
                &row(13.0, 75.0, 310.0, 140.0, 170.0, 3.5),
            ],
        );
        let series = parse_epw(&text).unwrap();
        assert_eq!(series.len(), 2);
        let r = series.records()[0];
        assert_eq!(r.t_out, 12.5);
        assert_eq!(r.h_out, 80.0);
        assert_eq!(r.s_direct, 300.0);
        assert_eq!(r.s_diffuse, 150.0);
        assert_eq!(r.w_out, 180.0);
        assert_eq!(r.v_out, 4.0);
    }

    #[test]
    fn sentinel_carries_previous_value_forward() {
        let first = row(10.0, 60.0, 100.0, 50.0, 90.0, 2.0);
        let second = row(99.9, 999.0, 9999.0, 9999.0, 999.0, 999.0);
        let text = epw_text(8, &[&first, &second]);
        let series = parse_epw(&text).unwrap();
        let r = series.records()[1];
        assert_eq!(r.t_out, 10.0);
        assert_eq!(r.h_out, 60.0);
        assert_eq!(r.s_direct, 100.0);
        assert_eq!(r.s_diffuse, 50.0);
        assert_eq!(r.w_out, 90.0);
        assert_eq!(r.v_out, 2.0);
    }

    #[test]
    fn sentinel_in_first_record_uses_fallbacks() {
        let first = row(99.9, 999.0, 9999.0, 9999.0, 999.0, 999.0);
        let second = row(10.0, 60.0, 100.0, 50.0, 90.0, 2.0);
        let text = epw_text(8, &[&first, &second]);
        let series = parse_epw(&text).unwrap();
        let r = series.records()[0];
        assert_eq!(r.t_out, 20.0);
        assert_eq!(r.h_out, 50.0);
        assert_eq!(r.s_direct, 0.0);
        assert_eq!(r.s_diffuse, 0.0);
        assert_eq!(r.w_out, 0.0);
        assert_eq!(r.v_out, 0.0);
    }

    #[test]
    fn too_few_header_lines() {
        let text = epw_text(7, &[]);
        assert!(matches!(
            parse_epw(&text),
            Err(WeatherError::TooFewHeaderLines)
        ));
    }

    #[test]
    fn short_row_and_bad_field_are_reported_with_position() {
        let good = row(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let text = epw_text(8, &[&good, "1,2,3"]);
        assert!(matches!(
            parse_epw(&text),
            Err(WeatherError::RowFieldCountBelow22 { row: 2 })
        ));

        let good = row(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let mut fields: Vec<&str> = good.split(',').collect();
        fields[EPW_COL_T_OUT] = "abc";
        let bad = fields.join(",");
        let text = epw_text(8, &[&bad]);
        assert!(matches!(
            parse_epw(&text),
            Err(WeatherError::NonNumericField { row: 1, col: 6 })
        ));
    }

    #[test]
    fn sample_on_hour_boundary_returns_record() {
        let series = synthesize(ClimateProfile::Cool, 1, 48).unwrap();
        let r = series.sample(3600.0 * 10.0).unwrap();
        assert_eq!(r, series.records()[10]);
    }

    #[test]
    fn sample_interpolates_midpoint() {
        let records = vec![
            WeatherRecord {
                hour_index: 0,
                t_out: 10.0,
                h_out: 40.0,
                v_out: 0.0,
                w_out: 10.0,
                s_diffuse: 0.0,
                s_direct: 0.0,
            },
            WeatherRecord {
                hour_index: 1,
                t_out: 20.0,
                h_out: 60.0,
                v_out: 4.0,
                w_out: 350.0,
                s_diffuse: 100.0,
                s_direct: 200.0,
            },
        ];
        let series = WeatherSeries::new(records, "fixture").unwrap();
        let mid = series.sample(1800.0).unwrap();
        assert!((mid.t_out - 15.0).abs() < 1e-12);
        assert!((mid.h_out - 50.0).abs() < 1e-12);
        // Nearest neighbor for direction: 1500 s is 25 min, closer to hour 0.
        let early = series.sample(1500.0).unwrap();
        assert_eq!(early.w_out, 10.0);
        let late = series.sample(2700.0).unwrap();
        assert_eq!(late.w_out, 350.0);
    }

    #[test]
    fn sample_out_of_range() {
        let series = synthesize(ClimateProfile::Hot, 1, 24).unwrap();
        assert!(series.sample(-1.0).is_err());
        assert!(series.sample(3600.0 * 23.0).is_ok());
        assert!(series.sample(3600.0 * 23.0 + 1.0).is_err());
    }

    #[test]
    fn split_sizes_follow_rounding() {
        let series = synthesize(ClimateProfile::Hot, 3, 8760).unwrap();
        let split = series.split(0.8).unwrap();
        assert_eq!(split.train.len(), 7008);
        assert_eq!(split.eval.len(), 1752);
        assert_eq!(split.eval.records()[0].hour_index, 0);

        let small = synthesize(ClimateProfile::Hot, 3, 10).unwrap();
        let split = small.split(0.8).unwrap();
        assert_eq!(split.train.len(), 8);
        assert_eq!(split.eval.len(), 2);
    }

    #[test]
    fn split_degenerate_cases() {
        let series = synthesize(ClimateProfile::Hot, 3, 3).unwrap();
        assert!(matches!(
            series.split(0.8),
            Err(WeatherError::DegenerateSplit)
        ));
        assert!(WeatherSeries::new(vec![], "x").is_err());
    }

    #[test]
    fn split_preserves_content_and_order() {
        let series = synthesize(ClimateProfile::Cool, 9, 100).unwrap();
        let split = series.split(0.37).unwrap();
        let mut joined = split.train.records().to_vec();
        joined.extend_from_slice(split.eval.records());
        assert_eq!(joined.len(), series.len());
        for (a, b) in joined.iter().zip(series.records()) {
            assert_eq!(a.t_out, b.t_out);
            assert_eq!(a.h_out, b.h_out);
            assert_eq!(a.w_out, b.w_out);
        }
    }

    #[test]
    fn synthesize_is_deterministic() {
        let a = synthesize(ClimateProfile::Hot, 42, 200).unwrap();
        let b = synthesize(ClimateProfile::Hot, 42, 200).unwrap();
        assert_eq!(a, b);
        let c = synthesize(ClimateProfile::Hot, 43, 200).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthesize_hot_annual_mean_near_22() {
        let series = synthesize(ClimateProfile::Hot, 7, 8760).unwrap();
        let mean: f64 =
            series.records().iter().map(|r| r.t_out).sum::<f64>() / series.len() as f64;
        assert!((mean - 22.0).abs() < 1.0, "annual mean {mean}");
    }

    #[test]
    fn synthesize_rejects_single_hour() {
        assert!(matches!(
            synthesize(ClimateProfile::Hot, 1, 1),
            Err(WeatherError::HoursTooSmall { hours: 1 })
        ));
    }

    #[test]
    fn synthesized_records_satisfy_invariants_over_seeds() {
        for seed in 0..100 {
            let series = synthesize(ClimateProfile::Hot, seed, 72).unwrap();
            for r in series.records() {
                assert!((0.0..=100.0).contains(&r.h_out));
                assert!(r.v_out >= 0.0);
                assert!(r.s_diffuse >= 0.0);
                assert!(r.s_direct >= 0.0);
                assert!((0.0..360.0).contains(&r.w_out));
            }
        }
    }

    proptest! {
        // Interpolation continuity for the linearly sampled fields.
        #[test]
        fn sample_is_continuous(t in 0.0f64..(3600.0 * 47.0)) {
            let series = synthesize(ClimateProfile::Cool, 5, 48).unwrap();
            let eps = 1e-4;
            let a = series.sample(t).unwrap();
            let b = series.sample((t + eps).min(series.max_time_s())).unwrap();
            prop_assert!((a.t_out - b.t_out).abs() < 1e-6);
            prop_assert!((a.h_out - b.h_out).abs() < 1e-6);
            prop_assert!((a.v_out - b.v_out).abs() < 1e-6);
            prop_assert!((a.s_diffuse - b.s_diffuse).abs() < 1e-5);
            prop_assert!((a.s_direct - b.s_direct).abs() < 1e-5);
        }

        // Round trip through an independently written EPW serializer.
        #[test]
        fn epw_round_trip(seed in 0u64..500) {
            let series = synthesize(ClimateProfile::Hot, seed, 24).unwrap();
            let mut text = String::new();
            for i in 0..8 {
                text.push_str(&format!("H{i},roundtrip\n"));
            }
            for r in series.records() {
                let mut fields = vec!["0".to_string(); 35];
                fields[EPW_COL_T_OUT] = format!("{:.6}", r.t_out);
                fields[EPW_COL_H_OUT] = format!("{:.6}", r.h_out);
                fields[EPW_COL_S_DIRECT] = format!("{:.6}", r.s_direct);
                fields[EPW_COL_S_DIFFUSE] = format!("{:.6}", r.s_diffuse);
                fields[EPW_COL_W_OUT] = format!("{:.6}", r.w_out);
                fields[EPW_COL_V_OUT] = format!("{:.6}", r.v_out);
                text.push_str(&fields.join(","));
                text.push('\n');
            }
            let parsed = parse_epw(&text).unwrap();
            prop_assert_eq!(parsed.len(), series.len());
            for (a, b) in parsed.records().iter().zip(series.records()) {
                prop_assert!((a.t_out - b.t_out).abs() < 1e-5);
                prop_assert!((a.h_out - b.h_out).abs() < 1e-5);
                prop_assert!((a.v_out - b.v_out).abs() < 1e-5);
                prop_assert!((a.w_out - b.w_out).abs() < 1e-5);
                prop_assert!((a.s_diffuse - b.s_diffuse).abs() < 1e-5);
                prop_assert!((a.s_direct - b.s_direct).abs() < 1e-5);
            }
        }
    }
}
