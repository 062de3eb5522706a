//! Bucket index over axis-parallel boxes for point-coverage queries.

use std::collections::HashMap;

/// Boxes spanning more buckets than this are checked for every query.
const MAX_SPAN: usize = 4096;

pub(crate) struct BoxIndex {
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
    origin: Vec<f64>,
    bucket: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    large: Vec<usize>,
}

impl BoxIndex {
    pub(crate) fn new(boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let d = boxes.first().map_or(0, |b| b.0.len());
        let mut origin = vec![f64::INFINITY; d];
        let mut top = vec![f64::NEG_INFINITY; d];
        let mut widths: Vec<f64> = Vec::with_capacity(boxes.len());
        for (lo, hi) in &boxes {
            for i in 0..d {
                origin[i] = origin[i].min(lo[i]);
                top[i] = top[i].max(hi[i]);
            }
            widths.push(lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max));
        }
        widths.sort_by(f64::total_cmp);
        let extent = origin
            .iter()
            .zip(&top)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        let median = widths.get(widths.len() / 2).copied().unwrap_or(1.0);
        let bucket = median.max(extent / (1u64 << 20) as f64).max(1e-12);
        let mut index = BoxIndex {
            boxes,
            origin,
            bucket,
            buckets: HashMap::new(),
            large: Vec::new(),
        };
        for b in 0..index.boxes.len() {
            let (lo, hi) = (&index.boxes[b].0, &index.boxes[b].1);
            let ranges: Vec<(i64, i64)> = (0..d)
                .map(|i| (index.key(lo[i], i), index.key(hi[i], i)))
                .collect();
            let span = ranges
                .iter()
                .map(|(a, b)| (b - a + 1) as f64)
                .product::<f64>();
            if span > MAX_SPAN as f64 {
                index.large.push(b);
                continue;
            }
            let mut key: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            loop {
                index.buckets.entry(key.clone()).or_default().push(b);
                let mut axis = 0;
                while axis < d {
                    key[axis] += 1;
                    if key[axis] <= ranges[axis].1 {
                        break;
                    }
                    key[axis] = ranges[axis].0;
                    axis += 1;
                }
                if axis == d {
                    break;
                }
            }
        }
        index
    }

    fn key(&self, x: f64, axis: usize) -> i64 {
        ((x - self.origin[axis]) / self.bucket).floor() as i64
    }

    /// Indices of every box that may contain `p`.
    pub(crate) fn candidates<'a>(&'a self, p: &[f64]) -> impl Iterator<Item = usize> + 'a {
        let key: Vec<i64> = p.iter().enumerate().map(|(i, &x)| self.key(x, i)).collect();
        self.buckets
            .get(&key)
            .into_iter()
            .flatten()
            .chain(&self.large)
            .copied()
    }

    /// Largest inset `min_i min(p_i − lo_i, hi_i − p_i)` over candidate boxes
    /// near `p` (negative when `p` lies in none), with the box achieving it.
    pub(crate) fn depth(&self, p: &[f64]) -> (f64, Option<usize>) {
        let mut best = (f64::NEG_INFINITY, None);
        for b in self.candidates(p) {
            let (lo, hi) = &self.boxes[b];
            let inset = (0..p.len())
                .map(|i| (p[i] - lo[i]).min(hi[i] - p[i]))
                .fold(f64::INFINITY, f64::min);
            if inset > best.0 {
                best = (inset, Some(b));
            }
        }
        if best.1.is_none() {
            best.0 = -self.bucket;
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_containing_box() {
        let boxes = vec![
            (vec![0.0, 0.0], vec![1.0, 1.0]),
            (vec![1.0, 0.0], vec![2.0, 1.0]),
            (vec![-5.0, -5.0], vec![5.0, 5.0]),
        ];
        let idx = BoxIndex::new(boxes[..2].to_vec());
        let (d, b) = idx.depth(&[1.5, 0.5]);
        assert_eq!(b, Some(1));
        assert!((d - 0.5).abs() < 1e-15);
        assert!(idx.depth(&[3.0, 3.0]).0 < 0.0);
        let idx = BoxIndex::new(boxes);
        assert_eq!(idx.depth(&[0.0, 0.0]).1, Some(2));
    }
}
