//! Library side of the `bnpsched` command: run records, size lists and
//! benchmark aggregation.

pub mod bench;
pub mod record;

pub use record::RunRecord;

/// Machine counts a `N/A..N/B` range picks from: those with `n/m` in
/// `{10, 20/3, 5, 4, 3, 2, 1}`, which for `n = 300` is 30, 45, 60, 75, 100,
/// 150 and 300.
const RATIO_LADDER: [f64; 7] = [10.0, 20.0 / 3.0, 5.0, 4.0, 3.0, 2.0, 1.0];

/// Parses a comma-separated list of `n/m` sizes. An item `N/A..N/B` expands
/// to the ladder sizes with `A ≤ m ≤ B`.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>, String> {
    let pair = |s: &str| -> Result<(usize, usize), String> {
        let (n, m) = s.trim().split_once('/').ok_or_else(|| format!("size {s:?} is not n/m"))?;
        let n = n.trim().parse().map_err(|_| format!("bad job count in {s:?}"))?;
        let m = m.trim().parse().map_err(|_| format!("bad machine count in {s:?}"))?;
        if n == 0 || m == 0 {
            return Err(format!("size {s:?} must have n, m ≥ 1"));
        }
        Ok((n, m))
    };
    let mut sizes = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let ((n, a), (n2, b)) = (pair(lo)?, pair(hi)?);
                if n != n2 || a > b {
                    return Err(format!("range {item:?} needs equal n and ascending m"));
                }
                let mut ms: Vec<usize> = RATIO_LADDER
                    .iter()
                    .map(|r| (n as f64 / r).round() as usize)
                    .filter(|&m| (a..=b).contains(&m))
                    .collect();
                ms.dedup();
                sizes.extend(ms.into_iter().map(|m| (n, m)));
            }
            None => sizes.push(pair(item)?),
        }
    }
    if sizes.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(sizes)
}

pub fn instance_name(n: usize, m: usize, index: usize, seed: u64) -> String {
    format!("n{n}_m{m}_{index:02}_s{seed}")
}

/// Seed recorded in a name produced by [`instance_name`].
pub fn seed_from_name(name: &str) -> Option<u64> {
    name.rsplit_once("_s")?.1.parse().ok()
}
