use std::collections::HashMap;

use ndarray::Array2;

use crate::dsp::CfarHit;
use crate::scalar::Real;

/// 8-connected group of CFAR hits.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Hits of the group, strongest first.
    pub cells: Vec<CfarHit>,
}

impl Cluster {
    pub fn peak(&self) -> &CfarHit {
        &self.cells[0]
    }
}

/// Merges 8-connected hits. Clusters come out strongest-peak first; ties
/// break on bin order so the result does not depend on input order.
pub fn cluster_hits<T: Real>(hits: &[CfarHit], power: &Array2<T>) -> Vec<Cluster> {
    let index: HashMap<(usize, usize), usize> =
        hits.iter().enumerate().map(|(k, h)| ((h.range_bin, h.doppler_bin), k)).collect();
    let mut seen = vec![false; hits.len()];
    let mut sorted: Vec<usize> = (0..hits.len()).collect();
    sorted.sort_by_key(|&k| (hits[k].range_bin, hits[k].doppler_bin));
    let strength = |h: &CfarHit| power[[h.range_bin, h.doppler_bin]].to_f64_lossy();
    let order = |a: &CfarHit, b: &CfarHit| {
        strength(b).total_cmp(&strength(a)).then((a.range_bin, a.doppler_bin).cmp(&(b.range_bin, b.doppler_bin)))
    };
    let mut clusters = Vec::new();
    for start in sorted {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut cells = Vec::new();
        while let Some(k) = stack.pop() {
            let h = hits[k];
            cells.push(h);
            for dr in -1i64..=1 {
                for dd in -1i64..=1 {
                    let (r, d) = (h.range_bin as i64 + dr, h.doppler_bin as i64 + dd);
                    if r < 0 || d < 0 {
                        continue;
                    }
                    if let Some(&n) = index.get(&(r as usize, d as usize)) {
                        if !seen[n] {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        cells.sort_by(order);
        clusters.push(Cluster { cells });
    }
    clusters.sort_by(|a, b| order(a.peak(), b.peak()));
    clusters
}

/// Peak plus the members within `floor_db` of it.
pub fn significant_cells<T: Real>(cluster: &Cluster, power: &Array2<T>, floor_db: f64) -> Vec<CfarHit> {
    let p = |h: &CfarHit| power[[h.range_bin, h.doppler_bin]].to_f64_lossy();
    let limit = p(cluster.peak()) * 10f64.powf(-floor_db / 10.0);
    cluster.cells.iter().copied().filter(|h| p(h) >= limit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hit(r: usize, d: usize) -> CfarHit {
        CfarHit { range_bin: r, doppler_bin: d, snr_db: 0.0 }
    }

    #[test]
    fn diagonal_neighbours_merge() {
        let mut power = Array2::from_elem((20, 20), 1.0f64);
        power[[5, 5]] = 100.0;
        power[[6, 6]] = 50.0;
        power[[7, 7]] = 10.0;
        power[[15, 2]] = 200.0;
        let hits = [hit(7, 7), hit(15, 2), hit(5, 5), hit(6, 6)];
        let c = cluster_hits(&hits, &power);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].peak().range_bin, c[0].peak().doppler_bin), (15, 2));
        assert_eq!(c[1].cells.len(), 3);
        assert_eq!(c[1].peak().range_bin, 5);
        // 6 dB floor keeps 100 and 50, drops 10
        let kept = significant_cells(&c[1], &power, 6.0);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn gap_splits_clusters() {
        let power = Array2::from_elem((20, 20), 1.0f64);
        let c = cluster_hits(&[hit(1, 1), hit(1, 3)], &power);
        assert_eq!(c.len(), 2);
    }
}
