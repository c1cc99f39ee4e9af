//! SVG picture of the region layout.

use std::fmt::Write;

use crate::index_file::IndexBundle;

/// Stable colour for a region id (splitmix-style hash into hue).
pub fn region_color(id: usize) -> String {
    let mut z = (id as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let hue = z % 360;
    let light = 55 + (z >> 16) % 25;
    format!("hsl({hue},70%,{light}%)")
}

/// Regions as coloured cells, obstacles in black, cluster rectangles in red.
/// Map row 0 is drawn at the top, as in the text format.
pub fn render_svg(bundle: &IndexBundle) -> String {
    let map = &bundle.map;
    let idx = &bundle.index;
    let scale = (1000.0 / map.width.max(map.height)).clamp(1.0, 40.0);
    let (w, h) = (map.width * scale, map.height * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g stroke="none">"#);
    for cell in 0..idx.nx * idx.ny {
        let Some(r) = idx.mapper.get(cell) else {
            continue;
        };
        let rect = map.cell_rect(cell, idx.cell_size);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            rect.min.x * scale,
            rect.min.y * scale,
            rect.width() * scale,
            rect.height() * scale,
            region_color(r)
        );
    }
    let _ = writeln!(s, "</g>");
    let mut d = String::new();
    for ring in map.obstacles.iter().flat_map(|o| o.loops.iter()) {
        for (i, p) in ring.iter().enumerate() {
            let _ = write!(
                d,
                "{}{} {} ",
                if i == 0 { 'M' } else { 'L' },
                p.x * scale,
                p.y * scale
            );
        }
        d.push_str("Z ");
    }
    if !d.is_empty() {
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="black" fill-rule="evenodd"/>"#,
            d.trim_end()
        );
    }
    if let Some(spec) = &bundle.clusters {
        for r in &spec.rects {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="red" stroke-width="2"/>"#,
                r.min.x * scale,
                r.min.y * scale,
                r.width() * scale,
                r.height() * scale
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
