//! The 10-entry discrete setpoint action tables.

use crate::thermal::{SetpointCommand, ZoneSetpoint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("action {a} is outside [0, {max}]")]
    ActionOutOfRange { a: usize, max: usize },
}

/// Integer-indexed list of per-zone setpoint commands. Index 0 is the most
/// relaxed band and index 9 the most aggressive.
#[derive(Debug, Clone)]
pub struct ActionTable {
    entries: Vec<SetpointCommand>,
}

/// Shared band ladder for the fully conditioned zones: rows 0..=7 narrow the
/// (heating, cooling) band symmetrically from (15, 30) to (22, 23); rows 8
/// and 9 pin it shut at (22, 22) and (21, 21).
const BANDS: [(f64, f64); 10] = [
    (15.0, 30.0),
    (16.0, 29.0),
    (17.0, 28.0),
    (18.0, 27.0),
    (19.0, 26.0),
    (20.0, 25.0),
    (21.0, 24.0),
    (22.0, 23.0),
    (22.0, 22.0),
    (21.0, 21.0),
];

/// Heating setpoints for the heat-only bulk storage zone, rows 0..=9.
const BULK_HEATING: [f64; 10] = [15.0, 16.0, 17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 23.0, 24.0];

impl ActionTable {
    /// Warehouse table: (office hs, office cs, fine storage hs, fine storage
    /// cs, bulk storage hs) per row.
    pub fn warehouse() -> Self {
        let entries = (0..10)
            .map(|i| {
                let (hs, cs) = BANDS[i];
                SetpointCommand::new(vec![
                    ZoneSetpoint {
                        heating: hs,
                        cooling: Some(cs),
                    },
                    ZoneSetpoint {
                        heating: hs,
                        cooling: Some(cs),
                    },
                    ZoneSetpoint {
                        heating: BULK_HEATING[i],
                        cooling: None,
                    },
                ])
            })
            .collect();
        Self { entries }
    }

    /// Datacenter table: (west hs, west cs, east hs, east cs) per row.
    pub fn datacenter() -> Self {
        let entries = (0..10)
            .map(|i| {
                let (hs, cs) = BANDS[i];
                SetpointCommand::new(vec![
                    ZoneSetpoint {
                        heating: hs,
                        cooling: Some(cs),
                    };
                    2
                ])
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Setpoint command for action index `a`.
    pub fn decode(&self, a: usize) -> Result<&SetpointCommand, ActionError> {
        self.entries.get(a).ok_or(ActionError::ActionOutOfRange {
            a,
            max: self.entries.len() - 1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(cmd: &SetpointCommand) -> Vec<f64> {
        let mut out = Vec::new();
        for z in &cmd.zones {
            out.push(z.heating);
            if let Some(c) = z.cooling {
                out.push(c);
            }
        }
        out
    }

    #[test]
    fn warehouse_extreme_rows() {
        let table = ActionTable::warehouse();
        assert_eq!(table.len(), 10);
        assert_eq!(
            row(table.decode(0).unwrap()),
            vec![15.0, 30.0, 15.0, 30.0, 15.0]
        );
        assert_eq!(
            row(table.decode(9).unwrap()),
            vec![21.0, 21.0, 21.0, 21.0, 24.0]
        );
        assert_eq!(
            row(table.decode(8).unwrap()),
            vec![22.0, 22.0, 22.0, 22.0, 23.0]
        );
    }

    #[test]
    fn datacenter_row_5() {
        let table = ActionTable::datacenter();
        assert_eq!(table.len(), 10);
        assert_eq!(row(table.decode(5).unwrap()), vec![20.0, 25.0, 20.0, 25.0]);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let table = ActionTable::warehouse();
        assert!(matches!(
            table.decode(10),
            Err(ActionError::ActionOutOfRange { a: 10, max: 9 })
        ));
    }
}
