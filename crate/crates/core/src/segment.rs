//! Grain/background separation: Otsu threshold, binarization and
//! 8-connected component labeling.

use std::cmp::Ordering;

use crate::error::SegmentError;
use crate::raster::GrayImage;

/// Default minimum component size; smaller blobs are treated as noise.
pub const DEFAULT_MIN_AREA: usize = 50;

/// 8-neighborhood offsets as (row, col).
const NEIGHBORS_8: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self, SegmentError> {
        if width.checked_mul(height) != Some(mask.len()) {
            return Err(SegmentError::BadDimensions {
                width,
                height,
                len: mask.len(),
            });
        }
        Ok(Self { width, height, mask })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.width + col]
    }

    pub fn count_foreground(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Per-pixel component ids: 0 is background, 1..=count are grains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Label at a signed coordinate; outside the map reads as background.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> u32 {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            0
        } else {
            self.get(row as usize, col as usize)
        }
    }

    /// Debug rendering: background stays 0, label `l` maps to `l mod 255 + 1`.
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .labels
            .iter()
            .map(|&l| if l == 0 { 0 } else { (l % 255 + 1) as u8 })
            .collect();
        GrayImage::new(self.width, self.height, data).expect("label map has valid dimensions")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BoundingBox {
    pub fn touches_border(&self, width: usize, height: usize) -> bool {
        self.min_row == 0 || self.min_col == 0 || self.max_row + 1 == height || self.max_col + 1 == width
    }
}

/// One labeled grain. Pixels are `(row, col)` in raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub label: u32,
    pub pixels: Vec<(usize, usize)>,
    pub bounding_box: BoundingBox,
}

impl Region {
    /// Builds a region from arbitrary pixels; they are sorted into raster
    /// order. Returns `None` for an empty pixel list.
    pub fn from_pixels(label: u32, mut pixels: Vec<(usize, usize)>) -> Option<Self> {
        let first = *pixels.first()?;
        pixels.sort_unstable();
        let mut bb = BoundingBox {
            min_row: first.0,
            min_col: first.1,
            max_row: first.0,
            max_col: first.1,
        };
        for &(r, c) in &pixels {
            bb.min_row = bb.min_row.min(r);
            bb.min_col = bb.min_col.min(c);
            bb.max_row = bb.max_row.max(r);
            bb.max_col = bb.max_col.max(c);
        }
        Some(Self {
            label,
            pixels,
            bounding_box: bb,
        })
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Otsu's threshold over the 256-bin histogram. Pixels `<= t` form the
/// background class, matching [`binarize`]. Ties go to the smallest `t`.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8, SegmentError> {
    otsu_from_histogram(&img.histogram())
}

pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8, SegmentError> {
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if occupied.len() < 2 {
        return Err(SegmentError::NoContrast(occupied.first().copied().unwrap_or(0) as u8));
    }
    let total: u128 = hist.iter().map(|&h| h as u128).sum();
    let sum: u128 = hist.iter().enumerate().map(|(v, &h)| v as u128 * h as u128).sum();

    let mut best_t = 0u8;
    let mut best = ClassSplit::EMPTY;
    let (mut n0, mut s0) = (0u128, 0u128);
    for (t, &h) in hist.iter().enumerate() {
        n0 += h as u128;
        s0 += t as u128 * h as u128;
        let split = ClassSplit::new(n0, s0, total, sum);
        if split.cmp_score(&best) == Ordering::Greater {
            best = split;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

/// Between-class variance up to the constant factor `1/N⁴`:
/// `(N·S₀ − S·N₀)² / (N₀·N₁)`, held as an exact rational.
#[derive(Debug, Clone, Copy)]
struct ClassSplit {
    spread: u128,
    weight: u128,
}

impl ClassSplit {
    const EMPTY: Self = Self { spread: 0, weight: 1 };

    fn new(n0: u128, s0: u128, n: u128, s: u128) -> Self {
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            return Self::EMPTY;
        }
        let spread = (n * s0).abs_diff(s * n0);
        Self {
            spread,
            weight: n0 * n1,
        }
    }

    fn approx(&self) -> f64 {
        let d = self.spread as f64;
        d * d / self.weight as f64
    }

    fn cmp_score(&self, other: &Self) -> Ordering {
        let exact = (|| {
            let a = self.spread.checked_mul(self.spread)?;
            let c = other.spread.checked_mul(other.spread)?;
            let (b, d) = (self.weight, other.weight);
            if let (Some(ad), Some(cb)) = (a.checked_mul(d), c.checked_mul(b)) {
                return Some(ad.cmp(&cb));
            }
            // compare integer parts, then remainders
            match (a / b).cmp(&(c / d)) {
                Ordering::Equal => {
                    let (ra, rc) = (a % b, c % d);
                    Some(ra.checked_mul(d)?.cmp(&rc.checked_mul(b)?))
                }
                ord => Some(ord),
            }
        })();
        exact.unwrap_or_else(|| self.approx().total_cmp(&other.approx()))
    }
}

/// Foreground is every pixel strictly brighter than `t`.
pub fn binarize(img: &GrayImage, t: u8) -> BinaryImage {
    BinaryImage {
        width: img.width(),
        height: img.height(),
        mask: img.as_slice().iter().map(|&v| v > t).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelOptions {
    pub min_area: usize,
    /// Drop components that touch the image frame.
    pub exclude_border: bool,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self {
            min_area: DEFAULT_MIN_AREA,
            exclude_border: false,
        }
    }
}

/// 8-connected labeling; components smaller than `min_area` become background.
pub fn label_components(bin: &BinaryImage, min_area: usize) -> (LabelMap, Vec<Region>) {
    label_components_with(
        bin,
        LabelOptions {
            min_area,
            exclude_border: false,
        },
    )
}

pub fn label_components_with(bin: &BinaryImage, opts: LabelOptions) -> (LabelMap, Vec<Region>) {
    let (w, h) = (bin.width, bin.height);
    let mut labels = vec![0u32; w * h];
    let mut visited = vec![false; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if !bin.mask[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(idx) = stack.pop() {
            let (r, c) = (idx / w, idx % w);
            pixels.push((r, c));
            for (dr, dc) in NEIGHBORS_8 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    continue;
                }
                let n = nr as usize * w + nc as usize;
                if bin.mask[n] && !visited[n] {
                    visited[n] = true;
                    stack.push(n);
                }
            }
        }
        if pixels.len() < opts.min_area {
            continue;
        }
        let label = regions.len() as u32 + 1;
        let region = Region::from_pixels(label, pixels).expect("component has a seed pixel");
        if opts.exclude_border && region.bounding_box.touches_border(w, h) {
            continue;
        }
        for &(r, c) in &region.pixels {
            labels[r * w + c] = label;
        }
        regions.push(region);
    }

    let map = LabelMap {
        width: w,
        height: h,
        labels,
        count: regions.len() as u32,
    };
    (map, regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(width: usize, height: usize, data: Vec<u8>) -> GrayImage {
        GrayImage::new(width, height, data).unwrap()
    }

    fn mask_from(width: usize, height: usize, on: impl Fn(usize, usize) -> bool) -> BinaryImage {
        let mask = (0..width * height).map(|i| on(i / width, i % width)).collect();
        BinaryImage::new(width, height, mask).unwrap()
    }

    /// Exhaustive scan of all 256 thresholds, scoring each by
    /// w0·w1·(μ0 − μ1)² computed directly from the pixel classes. Scores are
    /// compared as exact rationals (pixel counts stay small in tests).
    fn otsu_oracle(pixels: &[u8]) -> Option<u8> {
        let n = pixels.len() as i128;
        let mut best: Option<(u8, i128, i128)> = None;
        for t in 0..=255u8 {
            let (lo, hi): (Vec<i128>, Vec<i128>) = {
                let lo: Vec<i128> = pixels.iter().filter(|&&p| p <= t).map(|&p| p as i128).collect();
                let hi: Vec<i128> = pixels.iter().filter(|&&p| p > t).map(|&p| p as i128).collect();
                (lo, hi)
            };
            let (n0, n1) = (lo.len() as i128, hi.len() as i128);
            // w0 w1 (μ0 − μ1)² = (n0 n1 / n²) (s0/n0 − s1/n1)² = (s0 n1 − s1 n0)² / (n² n0 n1)
            let (num, den) = if n0 == 0 || n1 == 0 {
                (0, 1)
            } else {
                let s0: i128 = lo.iter().sum();
                let s1: i128 = hi.iter().sum();
                let d = s0 * n1 - s1 * n0;
                (d * d, n * n * n0 * n1)
            };
            match best {
                Some((_, bn, bd)) if num * bd <= bn * den => {}
                _ => best = Some((t, num, den)),
            }
        }
        let distinct = pixels.iter().collect::<std::collections::BTreeSet<_>>().len();
        (distinct > 1).then(|| best.unwrap().0)
    }

    #[test]
    fn otsu_bimodal_separates() {
        let mut data = vec![0u8; 90];
        data.extend([255u8; 10]);
        let img = gray(10, 10, data);
        let t = otsu_threshold(&img).unwrap();
        let mask = binarize(&img, t);
        assert_eq!(mask.count_foreground(), 10);
    }

    #[test]
    fn otsu_constant_image_has_no_contrast() {
        let img = GrayImage::filled(4, 4, 7);
        assert!(matches!(otsu_threshold(&img), Err(SegmentError::NoContrast(7))));
    }

    #[test]
    fn otsu_two_levels_matches_oracle() {
        let mut data = vec![20u8; 50];
        data.extend([200u8; 50]);
        let t = otsu_threshold(&gray(10, 10, data.clone())).unwrap();
        assert_eq!(Some(t), otsu_oracle(&data));
        // every t in 20..200 gives the same split; the smallest wins
        assert_eq!(t, 20);
    }

    #[test]
    fn binarize_is_strict() {
        let img = gray(3, 1, vec![0, 100, 200]);
        assert_eq!(binarize(&img, 100).as_slice(), &[false, false, true]);
        assert_eq!(binarize(&img, 255).count_foreground(), 0);
        assert_eq!(binarize(&gray(2, 1, vec![0, 1]), 0).as_slice(), &[false, true]);
    }

    #[test]
    fn two_blocks() {
        let bin = mask_from(30, 12, |r, c| {
            (1..11).contains(&r) && ((1..11).contains(&c) || (15..25).contains(&c))
        });
        let (map, regions) = label_components(&bin, 50);
        assert_eq!(map.count(), 2);
        assert_eq!(regions.len(), 2);
        assert!(regions.iter().all(|r| r.area() == 100));
        assert_eq!(
            regions[0].bounding_box,
            BoundingBox {
                min_row: 1,
                min_col: 1,
                max_row: 10,
                max_col: 10
            }
        );
    }

    #[test]
    fn isolated_pixel_rejected() {
        let bin = mask_from(5, 5, |r, c| r == 2 && c == 2);
        let (map, regions) = label_components(&bin, 50);
        assert_eq!(map.count(), 0);
        assert!(regions.is_empty());
        assert!(map.as_slice().iter().all(|&l| l == 0));
    }

    /// Independent flood fill over the mask using a queue and 8-neighbor
    /// adjacency; returns the number of components.
    fn count_components_oracle(bin: &BinaryImage) -> usize {
        let (w, h) = (bin.width(), bin.height());
        let mut seen = vec![false; w * h];
        let mut count = 0;
        for r in 0..h {
            for c in 0..w {
                if !bin.get(r, c) || seen[r * w + c] {
                    continue;
                }
                count += 1;
                let mut queue = std::collections::VecDeque::from([(r, c)]);
                seen[r * w + c] = true;
                while let Some((qr, qc)) = queue.pop_front() {
                    for nr in qr.saturating_sub(1)..=(qr + 1).min(h - 1) {
                        for nc in qc.saturating_sub(1)..=(qc + 1).min(w - 1) {
                            if bin.get(nr, nc) && !seen[nr * w + nc] {
                                seen[nr * w + nc] = true;
                                queue.push_back((nr, nc));
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn diagonal_corner_contact_merges() {
        let bin = mask_from(10, 10, |r, c| {
            (r < 5 && c < 5) || ((5..10).contains(&r) && (5..10).contains(&c))
        });
        assert_eq!(bin.count_foreground(), 50);
        assert_eq!(count_components_oracle(&bin), 1);
        let (map, regions) = label_components(&bin, 1);
        assert_eq!(map.count(), 1);
        assert_eq!(regions[0].area(), 50);
    }

    #[test]
    fn raster_order_numbering() {
        // the lower-left blob starts later in raster order than the upper-right one
        let bin = mask_from(20, 20, |r, c| {
            ((2..6).contains(&r) && (12..16).contains(&c)) || ((10..14).contains(&r) && (1..5).contains(&c))
        });
        let (map, regions) = label_components(&bin, 1);
        assert_eq!(map.get(2, 12), 1);
        assert_eq!(map.get(10, 1), 2);
        assert_eq!(regions[0].label, 1);
        assert_eq!(regions[1].bounding_box.min_row, 10);
    }

    #[test]
    fn exclude_border_drops_edge_grains() {
        let bin = mask_from(20, 20, |r, c| {
            (r < 5 && c < 5) || ((10..15).contains(&r) && (10..15).contains(&c))
        });
        let (map, regions) = label_components_with(
            &bin,
            LabelOptions {
                min_area: 1,
                exclude_border: true,
            },
        );
        assert_eq!(map.count(), 1);
        assert_eq!(regions[0].label, 1);
        assert_eq!(regions[0].bounding_box.min_row, 10);
        assert_eq!(map.get(0, 0), 0);
    }

    #[test]
    fn debug_rendering() {
        let bin = mask_from(4, 1, |_, c| c != 1);
        let (map, _) = label_components(&bin, 1);
        assert_eq!(map.to_gray().as_slice(), &[2, 0, 3, 3]);
    }

    fn arb_mask() -> impl Strategy<Value = BinaryImage> {
        (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
            prop::collection::vec(prop::bool::weighted(0.45), w * h)
                .prop_map(move |m| BinaryImage::new(w, h, m).unwrap())
        })
    }

    proptest! {
        #[test]
        fn otsu_matches_exhaustive_oracle(data in prop::collection::vec(any::<u8>(), 2..200)) {
            let n = data.len();
            let img = gray(n, 1, data.clone());
            match otsu_oracle(&data) {
                Some(t) => prop_assert_eq!(otsu_threshold(&img).unwrap(), t),
                None => prop_assert!(otsu_threshold(&img).is_err()),
            }
        }

        #[test]
        fn otsu_matches_oracle_on_few_levels(data in prop::collection::vec(prop::sample::select(vec![0u8, 3, 40, 41, 128, 250, 255]), 2..120)) {
            let img = gray(data.len(), 1, data.clone());
            match otsu_oracle(&data) {
                Some(t) => prop_assert_eq!(otsu_threshold(&img).unwrap(), t),
                None => prop_assert!(otsu_threshold(&img).is_err()),
            }
        }

        #[test]
        fn labels_partition_foreground(bin in arb_mask(), min_area in 1usize..6) {
            let (map, regions) = label_components(&bin, min_area);
            prop_assert_eq!(map.count() as usize, regions.len());
            let labelled = map.as_slice().iter().filter(|&&l| l != 0).count();
            prop_assert_eq!(labelled, regions.iter().map(Region::area).sum::<usize>());
            for (i, region) in regions.iter().enumerate() {
                prop_assert_eq!(region.label as usize, i + 1);
                prop_assert!(region.area() >= min_area);
                for &(r, c) in &region.pixels {
                    prop_assert!(bin.get(r, c));
                    prop_assert_eq!(map.get(r, c), region.label);
                }
            }
            for (i, &l) in map.as_slice().iter().enumerate() {
                if !bin.as_slice()[i] {
                    prop_assert_eq!(l, 0);
                }
            }
            if min_area == 1 {
                prop_assert_eq!(regions.len(), count_components_oracle(&bin));
            }
        }

        #[test]
        fn labeling_is_translation_invariant(bin in arb_mask(), dr in 0usize..4, dc in 0usize..4) {
            let (w, h) = (bin.width() + dc, bin.height() + dr);
            let shifted = mask_from(w, h, |r, c| r >= dr && c >= dc && bin.get(r - dr, c - dc));
            let (_, a) = label_components(&bin, 2);
            let (_, b) = label_components(&shifted, 2);
            prop_assert_eq!(a.len(), b.len());
            for (ra, rb) in a.iter().zip(&b) {
                let moved: Vec<_> = ra.pixels.iter().map(|&(r, c)| (r + dr, c + dc)).collect();
                prop_assert_eq!(&moved, &rb.pixels);
            }
        }
    }
}
