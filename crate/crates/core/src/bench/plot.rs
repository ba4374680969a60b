//! Learning-curve data for external plotting.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::record::RunRecord;

/// Mean and population standard deviation of `value(record, episode)`
/// across records, per episode. Records shorter than the longest one stop
/// contributing once they run out.
pub fn curve(records: &[RunRecord], value: impl Fn(&RunRecord, usize) -> Option<f64>) -> Vec<(usize, f64, f64)> {
    let len = records.iter().map(|r| r.episodes.len()).max().unwrap_or(0);
    (0..len)
        .filter_map(|ep| {
            let xs: Vec<f64> = records.iter().filter_map(|r| value(r, ep)).collect();
            if xs.is_empty() {
                return None;
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            Some((ep, mean, var.sqrt()))
        })
        .collect()
}

/// Share of each joint action among the first actions of the last (up to)
/// `window` episodes, averaged over records. Rows are
/// `(episode, frequencies in row-major joint-action order)`.
pub fn joint_action_frequencies(records: &[RunRecord], n_a1: usize, n_a2: usize, window: usize) -> Vec<(usize, Vec<f64>)> {
    let len = records.iter().map(|r| r.episodes.len()).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(len);
    for ep in 0..len {
        let lo = (ep + 1).saturating_sub(window);
        let mut freq = vec![0.0; n_a1 * n_a2];
        let mut runs = 0.0;
        for r in records.iter().filter(|r| r.episodes.len() > ep) {
            let slice = &r.episodes[lo..=ep];
            for e in slice {
                let (a1, a2) = e.first_action;
                freq[a1 * n_a2 + a2] += 1.0 / slice.len() as f64;
            }
            runs += 1.0;
        }
        freq.iter_mut().for_each(|f| *f /= runs);
        rows.push((ep, freq));
    }
    rows
}

fn write_series(path: &Path, rows: &[(usize, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["episode", "value", "std"])?;
    for (ep, v, s) in rows {
        w.write_record([ep.to_string(), v.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per series into `dir` and returns the paths written.
///
/// Series: both agents' episode returns; the probed start-state values and
/// follower probability when the records carry them; and, for one-step
/// games, the recent-100-episode joint-action frequencies.
pub fn emit_plot_data(records: &[RunRecord], labels: (&[String], &[String]), dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, rows: Vec<(usize, f64, f64)>| -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let path = dir.join(format!("{name}.csv"));
        write_series(&path, &rows)?;
        written.push(path);
        Ok(())
    };
    emit("return_leader", curve(records, |r, ep| r.episodes.get(ep).map(|e| e.return1)))?;
    emit("return_follower", curve(records, |r, ep| r.episodes.get(ep).map(|e| e.return2)))?;
    emit("q_leader_probe", curve(records, |r, ep| r.episodes.get(ep).and_then(|e| e.probe).map(|p| p.0)))?;
    emit("q_follower_probe", curve(records, |r, ep| r.episodes.get(ep).and_then(|e| e.probe).map(|p| p.1)))?;
    emit("follower_probability", curve(records, |r, ep| r.episodes.get(ep).and_then(|e| e.follower_prob)))?;

    if records.iter().all(|r| r.one_step) {
        let (l1, l2) = labels;
        let rows = joint_action_frequencies(records, l1.len(), l2.len(), 100);
        let path = dir.join("joint_action_frequency.csv");
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["episode".to_string()];
        header.extend(l1.iter().flat_map(|a| l2.iter().map(move |b| format!("{a}-{b}"))));
        w.write_record(&header)?;
        for (ep, freq) in rows {
            let mut row = vec![ep.to_string()];
            row.extend(freq.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{EpisodeLog, GreedyEval};

    fn record(returns: &[f64], actions: &[(usize, usize)]) -> RunRecord {
        let episodes = returns
            .iter()
            .zip(actions)
            .enumerate()
            .map(|(i, (&r, &a))| EpisodeLog {
                episode: i,
                return1: r,
                return2: -r,
                first_action: a,
                greedy: a,
                policy_hash: 0,
                probe: None,
                follower_prob: None,
                outcome: None,
            })
            .collect();
        RunRecord {
            algorithm: "test".into(),
            env: "matrix".into(),
            seed: 0,
            one_step: true,
            episodes,
            final_eval: GreedyEval { digest: 0, start_action: (0, 0), returns: (0.0, 0.0), endings: vec![] },
            converged: true,
            diverged: false,
        }
    }

    #[test]
    fn constant_records_have_zero_spread() {
        let rs = vec![record(&[3.0; 4], &[(0, 0); 4]), record(&[3.0; 4], &[(0, 0); 4])];
        let c = curve(&rs, |r, ep| r.episodes.get(ep).map(|e| e.return1));
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|&(_, m, s)| m == 3.0 && s == 0.0));
    }

    #[test]
    fn window_grows_from_one() {
        let rs = vec![record(&[0.0; 3], &[(0, 0), (1, 1), (1, 1)])];
        let f = joint_action_frequencies(&rs, 2, 2, 100);
        assert_eq!(f[0].1, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f[1].1, vec![0.5, 0.0, 0.0, 0.5]);
        let f = joint_action_frequencies(&rs, 2, 2, 2);
        assert_eq!(f[2].1, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn empty_input_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plot_data(&[], (&[], &[]), dir.path()), Err(Error::EmptyRecords)));
    }
}
