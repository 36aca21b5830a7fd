use std::fmt::Write;

/// Left-aligned grid with a header row and a header column.
pub fn grid(corner: &str, cols: &[String], rows: &[(String, Vec<String>)]) -> String {
    let mut widths = vec![corner.len()];
    widths.extend(cols.iter().map(String::len));
    for (label, cells) in rows {
        widths[0] = widths[0].max(label.len());
        for (k, c) in cells.iter().enumerate() {
            widths[k + 1] = widths[k + 1].max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "| {} |", parts.join(" | "));
    };
    line(std::iter::once(corner).chain(cols.iter().map(String::as_str)).collect());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(rule.iter().map(String::as_str).collect());
    for (label, cells) in rows {
        line(
            std::iter::once(label.as_str())
                .chain(cells.iter().map(String::as_str))
                .collect(),
        );
    }
    out
}
