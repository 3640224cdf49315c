//! One-dimensional task families: per-family input samplers and the pure
//! ground-truth transforms they are verified against.
//!
//! Rows are plain `Vec<u8>` color codes here; the parent module wraps them
//! into grids. Every transform is total: `None` means the input is not a
//! member of the family's domain.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GenParams, TaskFamily};

const GREEN: u8 = 3;
const GREY: u8 = 5;
const BLUE: u8 = 1;
const RED: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) struct Run {
    pub start: usize,
    pub len: usize,
    pub color: u8,
}

impl Run {
    fn end(&self) -> usize {
        self.start + self.len - 1
    }
}

/// Maximal same-color runs of non-background cells, left to right.
pub(super) fn runs(row: &[u8]) -> Vec<Run> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < row.len() {
        if row[i] == 0 {
            i += 1;
            continue;
        }
        let start = i;
        let color = row[i];
        while i < row.len() && row[i] == color {
            i += 1;
        }
        out.push(Run {
            start,
            len: i - start,
            color,
        });
    }
    out
}

/// Contiguous non-background segments regardless of color: (start, colors).
fn segments(row: &[u8]) -> Vec<(usize, Vec<u8>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < row.len() {
        if row[i] == 0 {
            i += 1;
            continue;
        }
        let start = i;
        let mut colors = Vec::new();
        while i < row.len() && row[i] != 0 {
            colors.push(row[i]);
            i += 1;
        }
        out.push((start, colors));
    }
    out
}

fn paint(row: &mut [u8], start: usize, len: usize, color: u8) -> bool {
    if start + len > row.len() {
        return false;
    }
    for cell in &mut row[start..start + len] {
        if *cell != 0 {
            return false;
        }
        *cell = color;
    }
    true
}

fn any_color(rng: &mut ChaCha8Rng) -> u8 {
    rng.gen_range(1..=9)
}

fn color_except(rng: &mut ChaCha8Rng, banned: &[u8]) -> u8 {
    loop {
        let c = any_color(rng);
        if !banned.contains(&c) {
            return c;
        }
    }
}

fn distinct_colors(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut pool: Vec<u8> = (1..=9).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Place `spans` left to right within `len` cells, keeping at least the given
/// gaps/margins and spreading the remaining slack at random. Returns the
/// start position of each span.
fn scatter(
    rng: &mut ChaCha8Rng,
    len: usize,
    spans: &[usize],
    min_gap: usize,
    min_lead: usize,
    min_trail: usize,
) -> Option<Vec<usize>> {
    let needed = spans.iter().sum::<usize>()
        + min_gap * spans.len().saturating_sub(1)
        + min_lead
        + min_trail;
    if needed > len || spans.is_empty() {
        return None;
    }
    let slack = len - needed;
    let slots = spans.len() + 1;
    let mut extra = vec![0usize; slots];
    for _ in 0..slack {
        extra[rng.gen_range(0..slots)] += 1;
    }
    let mut starts = Vec::with_capacity(spans.len());
    let mut pos = min_lead + extra[0];
    for (i, &s) in spans.iter().enumerate() {
        starts.push(pos);
        pos += s;
        if i + 1 < spans.len() {
            pos += min_gap + extra[i + 1];
        }
    }
    Some(starts)
}

fn size_in(rng: &mut ChaCha8Rng, p: &GenParams, min: usize) -> usize {
    let lo = p.object_size_range.0.max(min);
    let hi = p.object_size_range.1.max(lo);
    rng.gen_range(lo..=hi)
}

fn row_len(rng: &mut ChaCha8Rng, p: &GenParams, family: TaskFamily) -> usize {
    rng.gen_range(family.min_width()..=p.width)
}

/// Draw one candidate input row for a 1D family.
pub(super) fn sample_row(
    family: TaskFamily,
    rng: &mut ChaCha8Rng,
    p: &GenParams,
) -> Option<Vec<u8>> {
    use TaskFamily::*;
    let len = row_len(rng, p, family);
    let mut row = vec![0u8; len];
    match family {
        Move1 | Move2 | Move3 => {
            let k = move_shift(family);
            let s = size_in(rng, p, 1);
            let starts = scatter(rng, len, &[s], 0, 0, k)?;
            paint(&mut row, starts[0], s, any_color(rng)).then_some(row)
        }
        MoveDynamic => {
            let s = size_in(rng, p, 1);
            let starts = scatter(rng, len, &[s, 1], 1, 0, 0)?;
            let ok = paint(&mut row, starts[0], s, color_except(rng, &[GREEN]))
                && paint(&mut row, starts[1], 1, GREEN);
            ok.then_some(row)
        }
        Move2Towards => {
            let (s1, s2) = (size_in(rng, p, 1), size_in(rng, p, 1));
            let colors = distinct_colors(rng, 2);
            let starts = scatter(rng, len, &[s1, s2], 1, 0, 0)?;
            let ok = paint(&mut row, starts[0], s1, colors[0])
                && paint(&mut row, starts[1], s2, colors[1]);
            ok.then_some(row)
        }
        Fill => {
            let c = any_color(rng);
            let starts = scatter(rng, len, &[1, 1], 2, 0, 0)?;
            let ok = paint(&mut row, starts[0], 1, c) && paint(&mut row, starts[1], 1, c);
            ok.then_some(row)
        }
        PaddedFill => {
            let colors = distinct_colors(rng, 2);
            let starts = scatter(rng, len, &[1, 1, 1, 1], 1, 1, 1)?;
            let ok = paint(&mut row, starts[0], 1, colors[0])
                && paint(&mut row, starts[1], 1, colors[0])
                && paint(&mut row, starts[2], 1, colors[1])
                && paint(&mut row, starts[3], 1, colors[1]);
            ok.then_some(row)
        }
        Hollow => {
            let s = size_in(rng, p, 3);
            let starts = scatter(rng, len, &[s], 0, 0, 0)?;
            paint(&mut row, starts[0], s, any_color(rng)).then_some(row)
        }
        Flip => {
            let s = size_in(rng, p, 3);
            let starts = scatter(rng, len, &[s], 0, 0, 0)?;
            let colors = distinct_colors(rng, 2);
            let ok = paint(&mut row, starts[0], 1, colors[0])
                && paint(&mut row, starts[0] + 1, s - 1, colors[1]);
            ok.then_some(row)
        }
        Mirror => {
            let s = size_in(rng, p, 2);
            let d = rng.gen_range(1..=3);
            let needed = 2 * s + 2 * d + 1;
            if needed > len {
                return None;
            }
            let lead = rng.gen_range(0..=len - needed);
            let ok = paint(&mut row, lead, s, color_except(rng, &[GREY]))
                && paint(&mut row, lead + s + d, 1, GREY);
            ok.then_some(row)
        }
        Denoise => {
            let s = size_in(rng, p, 2);
            let noise = p.num_objects.saturating_sub(1).clamp(1, 3);
            let c = any_color(rng);
            scatter_mixed(rng, &mut row, s, c, noise, |_| c)?;
            Some(row)
        }
        DenoiseMulticolor => {
            let s = size_in(rng, p, 2);
            let noise = p.num_objects.saturating_sub(1).clamp(1, 3);
            let c = any_color(rng);
            scatter_mixed(rng, &mut row, s, c, noise, any_color)?;
            Some(row)
        }
        PatternCopy | PatternCopyMulticolor => {
            let plen = size_in(rng, p, 2);
            let markers = p.num_objects.saturating_sub(1).clamp(1, 2);
            let mut colors = vec![any_color(rng); plen];
            if family == PatternCopyMulticolor {
                for c in colors.iter_mut().skip(1) {
                    *c = any_color(rng);
                }
                colors[1] = color_except(rng, &[colors[0]]);
            }
            // Reserve the full copy footprint for every marker.
            let spans = vec![plen; markers + 1];
            let starts = scatter(rng, len, &spans, 1, 0, 0)?;
            for (i, &c) in colors.iter().enumerate() {
                if !paint(&mut row, starts[0] + i, 1, c) {
                    return None;
                }
            }
            for &m in &starts[1..] {
                if !paint(&mut row, m, 1, colors[0]) {
                    return None;
                }
            }
            Some(row)
        }
        RecolorByOddEven => {
            let k = p.num_objects.clamp(2, 3);
            let sizes: Vec<usize> = (0..k).map(|_| size_in(rng, p, 1)).collect();
            let starts = scatter(rng, len, &sizes, 1, 0, 0)?;
            for (st, sz) in starts.iter().zip(&sizes) {
                if !paint(&mut row, *st, *sz, GREY) {
                    return None;
                }
            }
            Some(row)
        }
        RecolorBySize => {
            let mut sizes = [2usize, 3, 4];
            sizes.shuffle(rng);
            let starts = scatter(rng, len, &sizes, 1, 0, 0)?;
            for (st, sz) in starts.iter().zip(&sizes) {
                if !paint(&mut row, *st, *sz, GREY) {
                    return None;
                }
            }
            Some(row)
        }
        RecolorBySizeComparison => {
            let k = p.num_objects.clamp(2, 3);
            let mut pool: Vec<usize> =
                (p.object_size_range.0..=p.object_size_range.1.max(p.object_size_range.0))
                    .collect();
            if pool.len() < k {
                return None;
            }
            pool.shuffle(rng);
            let sizes: Vec<usize> = pool.into_iter().take(k).collect();
            let starts = scatter(rng, len, &sizes, 1, 0, 0)?;
            for (st, sz) in starts.iter().zip(&sizes) {
                if !paint(&mut row, *st, *sz, GREY) {
                    return None;
                }
            }
            Some(row)
        }
        Scaling => {
            let k = p.num_objects.clamp(1, 2);
            let sizes: Vec<usize> = (0..k).map(|_| size_in(rng, p, 1)).collect();
            let colors = distinct_colors(rng, k);
            // Lay out the doubled footprints so the output is collision-free.
            let spans: Vec<usize> = sizes.iter().map(|s| 2 * s).collect();
            let starts = scatter(rng, len, &spans, 1, 0, 0)?;
            for ((st, sz), c) in starts.iter().zip(&sizes).zip(&colors) {
                if !paint(&mut row, *st, *sz, *c) {
                    return None;
                }
            }
            Some(row)
        }
        Fill2D | Move2D | Pile2D => unreachable!("2D families are sampled elsewhere"),
    }
}

/// Place one main block of size `s` plus `noise` isolated single pixels in
/// random order, coloring each noise pixel via `noise_color`.
fn scatter_mixed(
    rng: &mut ChaCha8Rng,
    row: &mut [u8],
    s: usize,
    block_color: u8,
    noise: usize,
    mut noise_color: impl FnMut(&mut ChaCha8Rng) -> u8,
) -> Option<()> {
    let mut items: Vec<usize> = vec![s];
    items.extend(std::iter::repeat_n(1, noise));
    // Shuffle which slot holds the block so it is not always leftmost.
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(rng);
    let spans: Vec<usize> = order.iter().map(|&i| items[i]).collect();
    let starts = scatter(rng, row.len(), &spans, 1, 0, 0)?;
    for (st, &ix) in starts.iter().zip(&order) {
        let (sz, color) = if ix == 0 {
            (s, block_color)
        } else {
            (1, noise_color(rng))
        };
        if !paint(row, *st, sz, color) {
            return None;
        }
    }
    Some(())
}

fn move_shift(family: TaskFamily) -> usize {
    match family {
        TaskFamily::Move1 => 1,
        TaskFamily::Move2 => 2,
        TaskFamily::Move3 => 3,
        _ => unreachable!(),
    }
}

/// Ground-truth transform for a 1D family.
pub(super) fn transform_row(family: TaskFamily, row: &[u8]) -> Option<Vec<u8>> {
    use TaskFamily::*;
    match family {
        Move1 | Move2 | Move3 => {
            let k = move_shift(family);
            let rs = runs(row);
            let [r] = rs.as_slice() else { return None };
            let mut out = vec![0u8; row.len()];
            paint(&mut out, r.start + k, r.len, r.color).then_some(out)
        }
        MoveDynamic => {
            let rs = runs(row);
            let [block, anchor] = rs.as_slice() else {
                return None;
            };
            if anchor.len != 1 || anchor.color != GREEN || block.color == GREEN {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            let new_start = anchor.start.checked_sub(block.len)?;
            let ok = paint(&mut out, new_start, block.len, block.color)
                && paint(&mut out, anchor.start, 1, GREEN);
            ok.then_some(out)
        }
        Move2Towards => {
            let rs = runs(row);
            let [left, right] = rs.as_slice() else {
                return None;
            };
            let mut out = vec![0u8; row.len()];
            let new_start = right.start.checked_sub(left.len)?;
            let ok = paint(&mut out, new_start, left.len, left.color)
                && paint(&mut out, right.start, right.len, right.color);
            ok.then_some(out)
        }
        Fill => {
            let rs = runs(row);
            let [a, b] = rs.as_slice() else { return None };
            if a.len != 1 || b.len != 1 || a.color != b.color {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            paint(&mut out, a.start, b.start - a.start + 1, a.color).then_some(out)
        }
        PaddedFill => {
            let rs = runs(row);
            let [a, b, c, d] = rs.as_slice() else {
                return None;
            };
            if rs.iter().any(|r| r.len != 1) || a.color != b.color || c.color != d.color {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            let ok = paint(&mut out, a.start, b.start - a.start + 1, a.color)
                && paint(&mut out, c.start, d.start - c.start + 1, c.color);
            ok.then_some(out)
        }
        Hollow => {
            let rs = runs(row);
            let [r] = rs.as_slice() else { return None };
            if r.len < 3 {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            out[r.start] = r.color;
            out[r.end()] = r.color;
            Some(out)
        }
        Flip => {
            let segs = segments(row);
            let [(start, colors)] = segs.as_slice() else {
                return None;
            };
            let mut out = vec![0u8; row.len()];
            for (i, &c) in colors.iter().rev().enumerate() {
                out[start + i] = c;
            }
            Some(out)
        }
        Mirror => {
            let rs = runs(row);
            let [obj, pivot] = rs.as_slice() else {
                return None;
            };
            if pivot.len != 1 || pivot.color != GREY || obj.color == GREY {
                return None;
            }
            let p = pivot.start;
            let new_start = (2 * p).checked_sub(obj.end())?;
            let mut out = vec![0u8; row.len()];
            let ok = paint(&mut out, p, 1, GREY) && paint(&mut out, new_start, obj.len, obj.color);
            ok.then_some(out)
        }
        Denoise => {
            let rs = runs(row);
            let keep: Vec<&Run> = rs.iter().filter(|r| r.len >= 2).collect();
            let [block] = keep.as_slice() else { return None };
            let mut out = vec![0u8; row.len()];
            paint(&mut out, block.start, block.len, block.color).then_some(out)
        }
        DenoiseMulticolor => {
            let rs = runs(row);
            let max = rs.iter().map(|r| r.len).max()?;
            let largest: Vec<&Run> = rs.iter().filter(|r| r.len == max).collect();
            let [block] = largest.as_slice() else {
                return None;
            };
            let mut out = vec![0u8; row.len()];
            paint(&mut out, block.start, block.len, block.color).then_some(out)
        }
        PatternCopy | PatternCopyMulticolor => {
            let segs = segments(row);
            let ((pstart, pattern), markers) = segs.split_first()?;
            if pattern.len() < 2 || markers.is_empty() {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            for (i, &c) in pattern.iter().enumerate() {
                out[pstart + i] = c;
            }
            for (mstart, mcolors) in markers {
                if mcolors.len() != 1 || mcolors[0] != pattern[0] {
                    return None;
                }
                if mstart + pattern.len() > row.len() {
                    return None;
                }
                for (i, &c) in pattern.iter().enumerate() {
                    if out[mstart + i] != 0 {
                        return None;
                    }
                    out[mstart + i] = c;
                }
            }
            Some(out)
        }
        RecolorByOddEven => {
            let rs = runs(row);
            if rs.is_empty() || rs.iter().any(|r| r.color != GREY) {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            for r in &rs {
                let c = if r.len % 2 == 0 { RED } else { BLUE };
                paint(&mut out, r.start, r.len, c);
            }
            Some(out)
        }
        RecolorBySize => {
            let rs = runs(row);
            if rs.is_empty() || rs.iter().any(|r| r.color != GREY) {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            for r in &rs {
                let c = match r.len {
                    2 => GREEN,
                    3 => RED,
                    4 => BLUE,
                    _ => return None,
                };
                paint(&mut out, r.start, r.len, c);
            }
            Some(out)
        }
        RecolorBySizeComparison => {
            let rs = runs(row);
            if rs.len() < 2 {
                return None;
            }
            let max = rs.iter().map(|r| r.len).max()?;
            let min = rs.iter().map(|r| r.len).min()?;
            if max == min
                || rs.iter().filter(|r| r.len == max).count() != 1
                || rs.iter().filter(|r| r.len == min).count() != 1
            {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            for r in &rs {
                let c = if r.len == max {
                    BLUE
                } else if r.len == min {
                    RED
                } else {
                    r.color
                };
                paint(&mut out, r.start, r.len, c);
            }
            Some(out)
        }
        Scaling => {
            let rs = runs(row);
            if rs.is_empty() {
                return None;
            }
            let mut out = vec![0u8; row.len()];
            for r in &rs {
                if !paint(&mut out, r.start, 2 * r.len, r.color) {
                    return None;
                }
            }
            Some(out)
        }
        Fill2D | Move2D | Pile2D => None,
    }
}
