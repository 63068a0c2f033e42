//! CSV and JSON writers. Column order and field names are fixed; see
//! `docs/schema.md`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::episode::RunRecord;
use crate::error::Result;

#[derive(Serialize)]
struct RoundRow {
    rep: usize,
    t: u64,
    price: f64,
    cumulative_regret: f64,
}

/// One row per round of every replication: `rep,t,price,cumulative_regret`.
/// Rounds are 1-based, replications 0-based.
pub fn write_rounds_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (rep, rec) in records.iter().enumerate() {
        for (i, (&price, &regret)) in rec.prices.iter().zip(&rec.cumulative_regret).enumerate() {
            w.serialize(RoundRow {
                rep,
                t: i as u64 + 1,
                price,
                cumulative_regret: regret,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes serializable rows under a header taken from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Diagnostics;

    fn record(prices: Vec<f64>, regret: Vec<f64>) -> RunRecord {
        RunRecord {
            seed: 0,
            policy: "x".into(),
            prices,
            cumulative_regret: regret,
            beta_hat: None,
            diagnostics: Diagnostics {
                clip_count: 0,
                bin_occupancy: vec![],
                exploration_rounds: 0,
                exploration_regret: 0.0,
                exploration_regret_share: 0.0,
            },
        }
    }

    #[test]
    fn rounds_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rounds.csv");
        let recs = vec![
            record(vec![0.5, 0.25], vec![0.0, 0.125]),
            record(vec![1.0], vec![0.5]),
        ];
        write_rounds_csv(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "rep,t,price,cumulative_regret\n0,1,0.5,0.0\n0,2,0.25,0.125\n1,1,1.0,0.5\n"
        );
    }

    #[test]
    fn json_ends_with_newline() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_json(&path, &serde_json::json!({"a": 1})).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "{\n  \"a\": 1\n}\n"
        );
    }
}
