use std::collections::{BTreeSet, VecDeque};

use super::LabelMap;

/// Splits every label into its 4-connected components, folds components
/// smaller than `min_size` into their largest neighbor, and relabels the
/// survivors densely in raster order of first occurrence.
pub fn enforce_connectivity(labels: &LabelMap, min_size: usize) -> LabelMap {
    enforce_raw(labels.width(), labels.height(), labels.labels(), min_size)
}

pub(crate) fn enforce_raw(width: usize, height: usize, raw: &[u32], min_size: usize) -> LabelMap {
    let (comp, sizes) = components(width, height, raw);
    let n = sizes.len();

    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let c = comp[i];
            if x + 1 < width && comp[i + 1] != c {
                adj[c as usize].insert(comp[i + 1]);
                adj[comp[i + 1] as usize].insert(c);
            }
            if y + 1 < height && comp[i + width] != c {
                adj[c as usize].insert(comp[i + width]);
                adj[comp[i + width] as usize].insert(c);
            }
        }
    }

    // `parent[c] == c` marks a live component; `adj` and `size` are kept
    // current for live components only.
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = sizes;
    loop {
        let mut changed = false;
        for c in 0..n {
            if parent[c] as usize != c || size[c] >= min_size || adj[c].is_empty() {
                continue;
            }
            // Largest neighbor; ties go to the lowest id.
            let target = *adj[c]
                .iter()
                .max_by(|&&p, &&q| size[p as usize].cmp(&size[q as usize]).then(q.cmp(&p)))
                .expect("non-empty adjacency");
            let t = target as usize;
            let c32 = c as u32;
            parent[c] = target;
            size[t] += size[c];
            let neighbors = std::mem::take(&mut adj[c]);
            for nb in neighbors {
                adj[nb as usize].remove(&c32);
                if nb != target {
                    adj[nb as usize].insert(target);
                    adj[t].insert(nb);
                }
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let mut dense = vec![u32::MAX; n];
    let mut next = 0u32;
    let labels = comp
        .iter()
        .map(|&c| {
            let r = find(&mut parent, c) as usize;
            if dense[r] == u32::MAX {
                dense[r] = next;
                next += 1;
            }
            dense[r]
        })
        .collect();
    LabelMap::from_dense(width, height, labels, next as usize)
}

fn find(parent: &mut [u32], mut c: u32) -> u32 {
    let mut root = c;
    while parent[root as usize] != root {
        root = parent[root as usize];
    }
    while parent[c as usize] != root {
        let next = parent[c as usize];
        parent[c as usize] = root;
        c = next;
    }
    root
}

/// 4-connected components of equal raw label, numbered in raster order.
fn components(width: usize, height: usize, raw: &[u32]) -> (Vec<u32>, Vec<usize>) {
    let mut comp = vec![u32::MAX; raw.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..raw.len() {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let label = raw[start];
        comp[start] = id;
        queue.push_back(start);
        let mut count = 0usize;
        while let Some(i) = queue.pop_front() {
            count += 1;
            let (x, y) = (i % width, i / width);
            let mut visit = |j: usize| {
                if comp[j] == u32::MAX && raw[j] == label {
                    comp[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < width {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - width);
            }
            if y + 1 < height {
                visit(i + width);
            }
        }
        sizes.push(count);
    }
    (comp, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, labels: &[u32]) -> LabelMap {
        LabelMap::new(w, h, labels.to_vec()).unwrap()
    }

    #[test]
    fn connected_map_is_only_renumbered() {
        #[rustfmt::skip]
        let input = map(4, 3, &[
            2, 2, 0, 0,
            2, 1, 1, 0,
            1, 1, 1, 0,
        ]);
        let out = enforce_connectivity(&input, 1);
        #[rustfmt::skip]
        assert_eq!(out.labels(), &[
            0, 0, 1, 1,
            0, 2, 2, 1,
            2, 2, 2, 1,
        ]);
        assert_eq!(out.region_count(), 3);
    }

    #[test]
    fn stray_pixel_is_absorbed() {
        let mut labels = vec![1u32; 25];
        labels[12] = 0;
        let out = enforce_connectivity(&map(5, 5, &labels), 2);
        assert_eq!(out.region_count(), 1);
        assert!(out.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn disconnected_label_is_split() {
        // Label 0 appears in two separate columns.
        let out = enforce_connectivity(&map(3, 2, &[0, 1, 0, 0, 1, 0]), 1);
        assert_eq!(out.labels(), &[0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn small_fragment_goes_to_largest_neighbor() {
        #[rustfmt::skip]
        let input = map(5, 3, &[
            0, 0, 1, 1, 1,
            0, 2, 1, 1, 1,
            0, 0, 1, 1, 1,
        ]);
        let out = enforce_connectivity(&input, 2);
        // The lone `2` touches label 0 (5 px) and label 1 (9 px).
        assert_eq!(out.get(1, 1), out.get(2, 1));
        assert_eq!(out.region_count(), 2);
    }

    #[test]
    fn lone_region_survives_below_min_size() {
        let out = enforce_connectivity(&map(2, 1, &[0, 0]), 10);
        assert_eq!(out.region_count(), 1);
    }
}
