//! Two-dimensional orientation families, horizontal form. Vertical variants
//! are produced by rotating whole tasks, not sampled here.

use rand::seq::index::sample as index_sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GenParams, TaskFamily};

/// Draw one candidate input grid for a 2D family (horizontal orientation).
pub(super) fn sample_grid(
    family: TaskFamily,
    rng: &mut ChaCha8Rng,
    p: &GenParams,
) -> Option<Vec<Vec<u8>>> {
    let h = rng.gen_range(5..=8);
    let w = rng.gen_range(8..=p.width.min(12));
    let mut rows = vec![vec![0u8; w]; h];
    match family {
        TaskFamily::Fill2D => {
            let nrows = rng.gen_range(2..=3);
            for r in index_sample(rng, h, nrows) {
                let color = rng.gen_range(1..=9);
                let a = rng.gen_range(0..=w - 3);
                let b = rng.gen_range(a + 2..=w - 1);
                rows[r][a] = color;
                rows[r][b] = color;
            }
            Some(rows)
        }
        TaskFamily::Move2D => {
            let k = rng.gen_range(2..=3);
            let mut rects: Vec<(usize, usize, usize, usize, u8)> = Vec::new();
            for _ in 0..k {
                let rh = rng.gen_range(1..=2);
                let rw = rng.gen_range(1..=3);
                let r0 = rng.gen_range(0..=h - rh);
                // Keep the last column free so everything can move right.
                let c0 = rng.gen_range(0..=w - 1 - rw);
                rects.push((r0, c0, rh, rw, rng.gen_range(1..=9)));
            }
            for i in 0..rects.len() {
                for j in (i + 1)..rects.len() {
                    if boxes_touch(rects[i], rects[j]) {
                        return None;
                    }
                }
            }
            for (r0, c0, rh, rw, color) in rects {
                for row in rows.iter_mut().skip(r0).take(rh) {
                    for cell in row.iter_mut().skip(c0).take(rw) {
                        *cell = color;
                    }
                }
            }
            Some(rows)
        }
        TaskFamily::Pile2D => {
            let nrows = rng.gen_range(2..=4);
            for r in index_sample(rng, h, nrows) {
                let k = rng.gen_range(2..=3);
                for c in index_sample(rng, w, k) {
                    rows[r][c] = rng.gen_range(1..=9);
                }
            }
            Some(rows)
        }
        _ => unreachable!("not a 2D family"),
    }
}

/// True when two rectangles overlap or sit within one cell of each other.
fn boxes_touch(a: (usize, usize, usize, usize, u8), b: (usize, usize, usize, usize, u8)) -> bool {
    let (ar0, ac0, arh, arw, _) = a;
    let (br0, bc0, brh, brw, _) = b;
    let (ar1, ac1) = (ar0 + arh - 1, ac0 + arw - 1);
    let (br1, bc1) = (br0 + brh - 1, bc0 + brw - 1);
    !(ar1 + 1 < br0 || br1 + 1 < ar0 || ac1 + 1 < bc0 || bc1 + 1 < ac0)
}

/// Ground-truth transform for a 2D family in horizontal form.
pub(super) fn transform_grid(family: TaskFamily, rows: &[Vec<u8>]) -> Option<Vec<Vec<u8>>> {
    let w = rows.first()?.len();
    match family {
        TaskFamily::Fill2D => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let cells: Vec<usize> = (0..w).filter(|&c| row[c] != 0).collect();
                match cells.as_slice() {
                    [] => out.push(row.clone()),
                    [a, b] if row[*a] == row[*b] => {
                        let mut filled = vec![0u8; w];
                        for cell in &mut filled[*a..=*b] {
                            *cell = row[*a];
                        }
                        out.push(filled);
                    }
                    _ => return None,
                }
            }
            Some(out)
        }
        TaskFamily::Move2D => {
            let mut out = vec![vec![0u8; w]; rows.len()];
            for (r, row) in rows.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    if v != 0 {
                        if c + 1 >= w {
                            return None;
                        }
                        out[r][c + 1] = v;
                    }
                }
            }
            Some(out)
        }
        TaskFamily::Pile2D => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let colors: Vec<u8> = row.iter().copied().filter(|&v| v != 0).collect();
                let mut packed = vec![0u8; w];
                for (i, &c) in colors.iter().enumerate() {
                    packed[w - colors.len() + i] = c;
                }
                out.push(packed);
            }
            Some(out)
        }
        _ => None,
    }
}
