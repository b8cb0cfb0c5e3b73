//! Hierarchical calendar tree: Root -> Year -> Month -> Day -> Hour.
//!
//! Every level is fully materialized for the covered span, parents point at
//! children with CONTAINS, and siblings are chained with NEXT_TIME in
//! chronological order across parent boundaries (Dec 31 -> Jan 1 and so on).
//! Hour nodes are the leaves every timestamp in the graph resolves to.

use super::{EdgeId, EdgeKind, EdgeRecord, NodeId, NodeLabel, NodeRecord, PropValue, Properties};
use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use std::collections::BTreeMap;

/// Hard cap on the covered span. Far beyond any plausible crash archive;
/// exists so a corrupt date cannot ask for a few billion hour nodes.
const MAX_SPAN_YEARS: i32 = 200;

#[derive(Debug, thiserror::Error)]
pub enum TimeTreeError {
    #[error("time tree span is empty: {start} > {end}")]
    EmptySpan {
        start: NaiveDateTime,
        end: NaiveDateTime,
    },
    #[error("time tree span of {0} years exceeds the {MAX_SPAN_YEARS} year cap")]
    SpanTooLarge(i32),
}

/// Freshly built tree records plus the navigation index. The assembler moves
/// the records into the graph unchanged, which keeps node ids stable.
#[derive(Debug)]
pub struct TimeTree {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub index: TimeTreeIndex,
}

/// Navigation structure over tree records. Rebuildable from any graph whose
/// TimeInstant nodes are intact, so it is never persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTreeIndex {
    pub root: NodeId,
    pub years: Vec<NodeId>,
    pub months: Vec<NodeId>,
    pub days: Vec<NodeId>,
    pub hours: Vec<NodeId>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    /// First and last hour covered by each non-root node, hour resolution.
    bounds: BTreeMap<NodeId, (NaiveDateTime, NaiveDateTime)>,
    hour_lookup: BTreeMap<(i32, u32, u32, u32), NodeId>,
    pub span: (NaiveDateTime, NaiveDateTime),
}

fn floor_hour(t: NaiveDateTime) -> NaiveDateTime {
    t.date().and_hms_opt(t.hour(), 0, 0).unwrap()
}

fn props(level: &str, parts: &[(&str, i64)]) -> Properties {
    let mut p = Properties::new();
    p.insert("level".to_string(), PropValue::Str(level.to_string()));
    for (k, v) in parts {
        p.insert((*k).to_string(), PropValue::Int(*v));
    }
    p
}

/// Materializes the calendar tree covering `[start, end]`, both floored to
/// the hour. Hours outside the span are not created even when their month
/// or year node is.
pub fn build_time_tree(
    start: NaiveDateTime,
    end: NaiveDateTime,
) -> Result<TimeTree, TimeTreeError> {
    let start = floor_hour(start);
    let end = floor_hour(end);
    if start > end {
        return Err(TimeTreeError::EmptySpan { start, end });
    }
    let span_years = end.year() - start.year() + 1;
    if span_years > MAX_SPAN_YEARS {
        return Err(TimeTreeError::SpanTooLarge(span_years));
    }

    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut bounds: BTreeMap<NodeId, (NaiveDateTime, NaiveDateTime)> = BTreeMap::new();
    let mut hour_lookup: BTreeMap<(i32, u32, u32, u32), NodeId> = BTreeMap::new();

    let push_node = |nodes: &mut Vec<NodeRecord>, label: NodeLabel, properties: Properties| {
        let id = nodes.len() as NodeId;
        nodes.push(NodeRecord {
            node_id: id,
            label,
            properties,
        });
        id
    };
    let contains = |edges: &mut Vec<EdgeRecord>, parent: NodeId, child: NodeId| {
        let id = edges.len() as EdgeId;
        edges.push(EdgeRecord {
            edge_id: id,
            kind: EdgeKind::Contains,
            source: parent,
            target: child,
            t_a: None,
            t_b: None,
            w_s: None,
            w_t: None,
        });
    };

    let root = push_node(&mut nodes, NodeLabel::TimeInstant, props("Root", &[]));
    bounds.insert(root, (start, end));

    let mut years = Vec::new();
    let mut months = Vec::new();
    let mut days = Vec::new();
    let mut hours = Vec::new();

    for year in start.year()..=end.year() {
        let y_node = push_node(
            &mut nodes,
            NodeLabel::TimeInstant,
            props("Year", &[("year", year as i64)]),
        );
        contains(&mut edges, root, y_node);
        children.entry(root).or_default().push(y_node);
        years.push(y_node);

        for month in 1u32..=12 {
            let first_day = NaiveDate::from_ymd_opt(year, month, 1).unwrap();
            let days_in_month = days_in_month(year, month);
            let m_first = first_day.and_hms_opt(0, 0, 0).unwrap();
            let m_last = NaiveDate::from_ymd_opt(year, month, days_in_month)
                .unwrap()
                .and_hms_opt(23, 0, 0)
                .unwrap();
            if m_last < start || m_first > end {
                continue;
            }
            let m_node = push_node(
                &mut nodes,
                NodeLabel::TimeInstant,
                props("Month", &[("year", year as i64), ("month", month as i64)]),
            );
            contains(&mut edges, y_node, m_node);
            children.entry(y_node).or_default().push(m_node);
            months.push(m_node);

            for day in 1..=days_in_month {
                let date = NaiveDate::from_ymd_opt(year, month, day).unwrap();
                let d_first = date.and_hms_opt(0, 0, 0).unwrap();
                let d_last = date.and_hms_opt(23, 0, 0).unwrap();
                if d_last < start || d_first > end {
                    continue;
                }
                let d_node = push_node(
                    &mut nodes,
                    NodeLabel::TimeInstant,
                    props(
                        "Day",
                        &[
                            ("year", year as i64),
                            ("month", month as i64),
                            ("day", day as i64),
                        ],
                    ),
                );
                contains(&mut edges, m_node, d_node);
                children.entry(m_node).or_default().push(d_node);
                days.push(d_node);
                bounds.insert(d_node, (d_first.max(start), d_last.min(end)));

                for hour in 0u32..24 {
                    let t = date.and_hms_opt(hour, 0, 0).unwrap();
                    if t < start || t > end {
                        continue;
                    }
                    let h_node = push_node(
                        &mut nodes,
                        NodeLabel::TimeInstant,
                        props(
                            "Hour",
                            &[
                                ("year", year as i64),
                                ("month", month as i64),
                                ("day", day as i64),
                                ("hour", hour as i64),
                            ],
                        ),
                    );
                    contains(&mut edges, d_node, h_node);
                    children.entry(d_node).or_default().push(h_node);
                    hours.push(h_node);
                    bounds.insert(h_node, (t, t));
                    hour_lookup.insert((year, month, day, hour), h_node);
                }
            }
            bounds.insert(m_node, (m_first.max(start), m_last.min(end)));
        }
        let y_first = NaiveDate::from_ymd_opt(year, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let y_last = NaiveDate::from_ymd_opt(year, 12, 31)
            .unwrap()
            .and_hms_opt(23, 0, 0)
            .unwrap();
        bounds.insert(y_node, (y_first.max(start), y_last.min(end)));
    }

    // Sibling chains run across parent boundaries: one total order per level.
    for level in [&years, &months, &days, &hours] {
        for pair in level.windows(2) {
            let id = edges.len() as EdgeId;
            edges.push(EdgeRecord {
                edge_id: id,
                kind: EdgeKind::NextTime,
                source: pair[0],
                target: pair[1],
                t_a: None,
                t_b: None,
                w_s: None,
                w_t: None,
            });
        }
    }

    let index = TimeTreeIndex {
        root,
        years,
        months,
        days,
        hours,
        children,
        bounds,
        hour_lookup,
        span: (start, end),
    };
    Ok(TimeTree { nodes, edges, index })
}

fn days_in_month(year: i32, month: u32) -> u32 {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .unwrap();
    next.signed_duration_since(NaiveDate::from_ymd_opt(year, month, 1).unwrap())
        .num_days() as u32
}

impl TimeTreeIndex {
    /// Hour node covering `t`, if the tree spans it.
    pub fn hour_node(&self, t: NaiveDateTime) -> Option<NodeId> {
        let f = floor_hour(t);
        self.hour_lookup
            .get(&(f.year(), f.month(), f.day(), f.hour()))
            .copied()
    }

    pub fn hour_count(&self) -> usize {
        self.hours.len()
    }

    /// All hour nodes inside `[start, end]` (hour floored, end inclusive),
    /// found by descending the tree and pruning whole subtrees that lie
    /// outside the window. Result is chronological.
    pub fn resolve(&self, start: NaiveDateTime, end: NaiveDateTime) -> Vec<NodeId> {
        let start = floor_hour(start);
        let end = floor_hour(end);
        if start > end {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = vec![self.root];
        while let Some(node) = stack.pop() {
            match self.children.get(&node) {
                Some(kids) => {
                    // Reverse push keeps traversal chronological with a stack.
                    for &kid in kids.iter().rev() {
                        let (lo, hi) = self.bounds[&kid];
                        if hi >= start && lo <= end {
                            stack.push(kid);
                        }
                    }
                }
                None => out.push(node), // hour leaf
            }
        }
        out
    }

    /// Calendar timestamp of an hour node.
    pub fn hour_value(&self, node: NodeId) -> Option<NaiveDateTime> {
        self.bounds.get(&node).and_then(|&(lo, hi)| {
            if lo == hi {
                Some(lo)
            } else {
                None
            }
        })
    }

    /// Rebuilds the index from graph records. TimeInstant nodes must form
    /// exactly the shape `build_time_tree` produces; anything else is a
    /// corrupt or foreign file.
    pub fn reconstruct(nodes: &[NodeRecord], edges: &[EdgeRecord]) -> Result<Self, String> {
        let mut root = None;
        let mut hours_with_key: Vec<((i32, u32, u32, u32), NodeId)> = Vec::new();
        let mut years: Vec<(i64, NodeId)> = Vec::new();
        let mut months: Vec<((i64, i64), NodeId)> = Vec::new();
        let mut days: Vec<((i64, i64, i64), NodeId)> = Vec::new();

        fn level_of(n: &NodeRecord) -> Result<&str, String> {
            n.properties
                .get("level")
                .and_then(PropValue::as_str)
                .ok_or_else(|| format!("TimeInstant node {} has no level", n.node_id))
        }
        fn int_prop(n: &NodeRecord, key: &str) -> Result<i64, String> {
            n.properties
                .get(key)
                .and_then(PropValue::as_i64)
                .ok_or_else(|| format!("TimeInstant node {} has no {}", n.node_id, key))
        }

        for n in nodes {
            if n.label != NodeLabel::TimeInstant {
                continue;
            }
            match level_of(n)? {
                "Root" => {
                    if root.replace(n.node_id).is_some() {
                        return Err("multiple Root time nodes".to_string());
                    }
                }
                "Year" => years.push((int_prop(n, "year")?, n.node_id)),
                "Month" => {
                    months.push(((int_prop(n, "year")?, int_prop(n, "month")?), n.node_id))
                }
                "Day" => days.push((
                    (int_prop(n, "year")?, int_prop(n, "month")?, int_prop(n, "day")?),
                    n.node_id,
                )),
                "Hour" => {
                    let key = (
                        int_prop(n, "year")? as i32,
                        int_prop(n, "month")? as u32,
                        int_prop(n, "day")? as u32,
                        int_prop(n, "hour")? as u32,
                    );
                    hours_with_key.push((key, n.node_id));
                }
                other => return Err(format!("unknown time level {other:?}")),
            }
        }

        let root = root.ok_or("no Root time node")?;
        if hours_with_key.is_empty() {
            return Err("time tree has no hour leaves".to_string());
        }
        years.sort();
        months.sort();
        days.sort();
        hours_with_key.sort();

        let mut hour_lookup = BTreeMap::new();
        let mut bounds: BTreeMap<NodeId, (NaiveDateTime, NaiveDateTime)> = BTreeMap::new();
        for &((y, m, d, h), id) in &hours_with_key {
            let t = NaiveDate::from_ymd_opt(y, m, d)
                .and_then(|date| date.and_hms_opt(h, 0, 0))
                .ok_or_else(|| format!("hour node {id} has invalid calendar fields"))?;
            if hour_lookup.insert((y, m, d, h), id).is_some() {
                return Err(format!("duplicate hour node for {y}-{m}-{d} {h}:00"));
            }
            bounds.insert(id, (t, t));
        }
        let span = (
            bounds[&hours_with_key.first().unwrap().1].0,
            bounds[&hours_with_key.last().unwrap().1].0,
        );
        let (start, end) = span;

        for &((y, m, d), id) in &days {
            let date = NaiveDate::from_ymd_opt(y as i32, m as u32, d as u32)
                .ok_or_else(|| format!("day node {id} has invalid calendar fields"))?;
            let lo = date.and_hms_opt(0, 0, 0).unwrap().max(start);
            let hi = date.and_hms_opt(23, 0, 0).unwrap().min(end);
            bounds.insert(id, (lo, hi));
        }
        for &((y, m), id) in &months {
            let first = NaiveDate::from_ymd_opt(y as i32, m as u32, 1)
                .ok_or_else(|| format!("month node {id} has invalid calendar fields"))?;
            let last = NaiveDate::from_ymd_opt(y as i32, m as u32, days_in_month(y as i32, m as u32))
                .unwrap();
            bounds.insert(
                id,
                (
                    first.and_hms_opt(0, 0, 0).unwrap().max(start),
                    last.and_hms_opt(23, 0, 0).unwrap().min(end),
                ),
            );
        }
        for &(y, id) in &years {
            let first = NaiveDate::from_ymd_opt(y as i32, 1, 1).unwrap();
            let last = NaiveDate::from_ymd_opt(y as i32, 12, 31).unwrap();
            bounds.insert(
                id,
                (
                    first.and_hms_opt(0, 0, 0).unwrap().max(start),
                    last.and_hms_opt(23, 0, 0).unwrap().min(end),
                ),
            );
        }
        bounds.insert(root, span);

        let tree_node = |id: NodeId| bounds.contains_key(&id);
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for e in edges {
            if e.kind == EdgeKind::Contains && tree_node(e.source) && tree_node(e.target) {
                children.entry(e.source).or_default().push(e.target);
            }
        }
        // Child ids ascend chronologically because construction allocates
        // them in calendar order; sorting restores that after any reshuffle.
        for kids in children.values_mut() {
            kids.sort_unstable();
        }

        Ok(TimeTreeIndex {
            root,
            years: years.into_iter().map(|(_, id)| id).collect(),
            months: months.into_iter().map(|(_, id)| id).collect(),
            days: days.into_iter().map(|(_, id)| id).collect(),
            hours: hours_with_key.into_iter().map(|(_, id)| id).collect(),
            children,
            bounds,
            hour_lookup,
            span,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").unwrap()
    }

    #[test]
    fn single_year_counts() {
        let tree = build_time_tree(dt("2014-01-01 00:00"), dt("2014-12-31 23:00")).unwrap();
        assert_eq!(tree.index.years.len(), 1);
        assert_eq!(tree.index.months.len(), 12);
        assert_eq!(tree.index.days.len(), 365);
        assert_eq!(tree.index.hours.len(), 8760);
        assert_eq!(tree.nodes.len(), 1 + 1 + 12 + 365 + 8760);
    }

    #[test]
    fn leap_year_has_its_extra_day() {
        let tree = build_time_tree(dt("2012-01-01 00:00"), dt("2012-12-31 23:00")).unwrap();
        assert_eq!(tree.index.days.len(), 366);
        assert!(tree.index.hour_node(dt("2012-02-29 13:30")).is_some());
    }

    #[test]
    fn partial_span_only_creates_covered_leaves() {
        let tree = build_time_tree(dt("2014-03-01 05:00"), dt("2014-03-02 01:00")).unwrap();
        assert_eq!(tree.index.days.len(), 2);
        assert_eq!(tree.index.hours.len(), 19 + 2);
        assert!(tree.index.hour_node(dt("2014-03-01 04:59")).is_none());
        assert!(tree.index.hour_node(dt("2014-03-01 05:10")).is_some());
    }

    #[test]
    fn next_time_chains_cross_parent_boundaries() {
        let tree = build_time_tree(dt("2013-12-31 00:00"), dt("2014-01-01 23:00")).unwrap();
        let chain: Vec<_> = tree
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::NextTime)
            .collect();
        // 1 year link + 1 month link + 1 day link + 47 hour links.
        assert_eq!(chain.len(), 1 + 1 + 1 + 47);
        let last_2013 = tree.index.hour_node(dt("2013-12-31 23:00")).unwrap();
        let first_2014 = tree.index.hour_node(dt("2014-01-01 00:00")).unwrap();
        assert!(chain
            .iter()
            .any(|e| e.source == last_2013 && e.target == first_2014));
    }

    #[test]
    fn resolve_prunes_to_exact_hours() {
        let tree = build_time_tree(dt("2014-01-01 00:00"), dt("2014-12-31 23:00")).unwrap();
        let hours = tree.index.resolve(dt("2014-03-01 22:00"), dt("2014-03-02 03:00"));
        assert_eq!(hours.len(), 6);
        assert_eq!(hours[0], tree.index.hour_node(dt("2014-03-01 22:00")).unwrap());
        assert_eq!(hours[5], tree.index.hour_node(dt("2014-03-02 03:00")).unwrap());
    }

    #[test]
    fn resolve_of_empty_window_is_empty() {
        let tree = build_time_tree(dt("2014-01-01 00:00"), dt("2014-01-02 23:00")).unwrap();
        assert!(tree.index.resolve(dt("2014-01-02 05:00"), dt("2014-01-02 04:00")).is_empty());
        assert!(tree.index.resolve(dt("2015-06-01 00:00"), dt("2015-06-02 00:00")).is_empty());
    }

    #[test]
    fn reconstruct_matches_fresh_index() {
        let tree = build_time_tree(dt("2013-11-01 00:00"), dt("2014-02-28 23:00")).unwrap();
        let rebuilt = TimeTreeIndex::reconstruct(&tree.nodes, &tree.edges).unwrap();
        assert_eq!(rebuilt, tree.index);
    }

    #[test]
    fn rejects_inverted_and_absurd_spans() {
        assert!(build_time_tree(dt("2014-01-02 00:00"), dt("2014-01-01 00:00")).is_err());
        assert!(build_time_tree(dt("1000-01-01 00:00"), dt("2014-01-01 00:00")).is_err());
    }
}
