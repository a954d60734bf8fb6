//! Read-only views of episode logs: step tables, plot CSV and SVG traces.

use std::fmt::Write as _;

use super::{EpisodeRecord, HarnessError, LOG_SCHEMA_VERSION};
use crate::world::HouseSpec;

/// Parses a JSONL log, rejecting records from another schema version.
pub fn parse_jsonl(text: &str) -> Result<Vec<EpisodeRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let value: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| HarnessError::SchemaMismatch(format!("line {}: {e}", i + 1)))?;
            let version = value.get("schema_version").and_then(|v| v.as_u64());
            if version != Some(LOG_SCHEMA_VERSION as u64) {
                return Err(HarnessError::SchemaMismatch(format!(
                    "line {}: schema_version {:?}, expected {LOG_SCHEMA_VERSION}",
                    i + 1,
                    version
                )));
            }
            serde_json::from_value(value)
                .map_err(|e| HarnessError::SchemaMismatch(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn render_step_table(r: &EpisodeRecord) -> String {
    let mut out = format!(
        "scene {} run {} | goal {} | planner {} | success {} | dist {:.2} m | shortest {:.2} m | retrials {}\n",
        r.scene_seed,
        r.run,
        r.task.goal,
        r.planner,
        r.success,
        r.dist_total,
        r.shortest_possible,
        r.retrials
    );
    out += &format!(
        "{:>4}  {:<40}  {:>4}  {:>7}  {:>5}  {:>8}\n",
        "step", "action", "exec", "dist", "nodes", "reward"
    );
    for s in &r.steps {
        let action = match (&s.outcome.action, &s.outcome.parse_failure) {
            (Some(a), _) => a.to_string(),
            (None, Some(f)) => format!("<{f}>"),
            (None, None) => "<none>".into(),
        };
        out += &format!(
            "{:>4}  {:<40}  {:>4}  {:>7.2}  {:>5}  {:>8.3}\n",
            s.index,
            action,
            if s.outcome.executable { "yes" } else { "no" },
            s.outcome.dist_delta,
            s.outcome.new_nodes,
            s.reward.total
        );
    }
    if let Some(f) = &r.fault {
        out += &format!("aborted: {f}\n");
    }
    out
}

/// One row per episode, for external plotting.
pub fn plot_csv(records: &[EpisodeRecord]) -> String {
    let mut out =
        String::from("scene_seed,run,planner,goal,success,steps,dist_total,shortest_possible,retrials,return\n");
    for r in records {
        let ret: f64 = r.steps.iter().map(|s| s.reward.total).sum();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.4},{},{:.4}",
            r.scene_seed,
            r.run,
            r.planner,
            r.task.goal,
            u8::from(r.success),
            r.steps.len(),
            r.dist_total,
            r.shortest_possible,
            r.retrials,
            ret
        );
    }
    out
}

const PX: i32 = 16;

/// Robot trajectory as SVG; the floor plan is drawn when the house is given.
pub fn render_svg(r: &EpisodeRecord, house: Option<&HouseSpec>) -> String {
    let mut cells = vec![r.start_cell];
    for s in &r.steps {
        cells.extend(s.path_cells.iter().copied());
    }
    let (w, h) = match house {
        Some(h) => (h.grid.width, h.grid.height),
        None => (
            cells.iter().map(|c| c.0).max().unwrap_or(0) + 2,
            cells.iter().map(|c| c.1).max().unwrap_or(0) + 2,
        ),
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        w * PX,
        h * PX,
        w * PX,
        h * PX
    );
    if let Some(house) = house {
        for (y, row) in house.grid.rows.iter().enumerate() {
            for (x, ch) in row.bytes().enumerate() {
                if ch == b'#' {
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{PX}\" height=\"{PX}\" fill=\"#444\"/>",
                        x as i32 * PX,
                        y as i32 * PX
                    );
                }
            }
        }
        for room in &house.rooms {
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#06c\">{}</text>",
                room.bounds.x0 * PX + 2,
                room.bounds.y0 * PX + 10,
                room.name
            );
        }
        for o in &house.objects {
            let colour = if o.category == r.task.goal { "#d00" } else { "#999" };
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{colour}\"><title>{}</title></circle>",
                o.cell.0 * PX + PX / 2,
                o.cell.1 * PX + PX / 2,
                o.name
            );
        }
    }
    let points: Vec<String> = cells
        .iter()
        .map(|c| format!("{},{}", c.0 * PX + PX / 2, c.1 * PX + PX / 2))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#0a0\" stroke-width=\"2\"/>",
        points.join(" ")
    );
    let _ = writeln!(
        out,
        "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"#0a0\"/>",
        r.start_cell.0 * PX + PX / 2,
        r.start_cell.1 * PX + PX / 2
    );
    out += "</svg>\n";
    out
}
