//! The fixed template catalog.

use serde::{Deserialize, Serialize};

use super::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Unit,
    Overview,
    Trend,
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    None,
    MinMax,
    Quartiles,
    Mean,
}

/// Whether a channel is a positional axis, and which one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub channel_name: String,
    pub orientation: Orientation,
    pub accepted_roles: Vec<Role>,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisTemplate {
    pub id: String,
    pub category: Category,
    pub channels: Vec<ChannelSpec>,
    pub aggregation: Aggregation,
}

impl VisTemplate {
    pub fn channel(&self, name: &str) -> Option<&ChannelSpec> {
        self.channels.iter().find(|c| c.channel_name == name)
    }

    /// Templates with an `x`/`y` pair where one side is a label role and the other the value.
    pub fn is_paired(&self) -> bool {
        PAIRED.contains(&self.id.as_str())
    }
}

const PAIRED: [&str; 6] = ["bar", "ranged_dot", "box_plot", "strip_plot", "horizon", "line"];

fn ch(name: &str, orientation: Orientation, roles: &[Role], required: bool) -> ChannelSpec {
    ChannelSpec {
        channel_name: name.to_string(),
        orientation,
        accepted_roles: roles.to_vec(),
        required,
    }
}

fn t(id: &str, category: Category, aggregation: Aggregation, channels: Vec<ChannelSpec>) -> VisTemplate {
    VisTemplate {
        id: id.to_string(),
        category,
        channels,
        aggregation,
    }
}

pub fn template_catalog() -> Vec<VisTemplate> {
    use Aggregation as A;
    use Category::*;
    use Orientation::{Horizontal as H, None as N, Vertical as V};
    use Role::{Value as Val, XNominal as X, YNominal as Y};
    let paired = || {
        vec![
            ch("x", H, &[X, Val], true),
            ch("y", V, &[Y, Val], true),
        ]
    };
    vec![
        t("unit_color", Unit, A::None, vec![ch("color", N, &[Val], true)]),
        t("unit_size", Unit, A::None, vec![ch("size", N, &[Val], true)]),
        t("unit_bar", Unit, A::None, vec![ch("x", H, &[Val], true)]),
        t("bar", Overview, A::Mean, paired()),
        t(
            "stacked_bar",
            Overview,
            A::None,
            vec![
                ch("x", H, &[X], true),
                ch("height", V, &[Val], true),
                ch("color", N, &[Y], true),
            ],
        ),
        t("ranged_dot", Overview, A::MinMax, paired()),
        t("box_plot", Overview, A::Quartiles, paired()),
        t("strip_plot", Overview, A::None, paired()),
        t(
            "parallel_coordinates",
            Overview,
            A::None,
            vec![
                ch("x", H, &[X], true),
                ch("y", V, &[Val], true),
                ch("detail", N, &[Y], true),
                ch("color", N, &[Y], false),
            ],
        ),
        t(
            "multi_line",
            Overview,
            A::None,
            vec![
                ch("x", H, &[X], true),
                ch("y", V, &[Val], true),
                ch("color", N, &[Y], true),
            ],
        ),
        t(
            "pie",
            Overview,
            A::Mean,
            vec![ch("theta", N, &[Val], true), ch("color", N, &[X, Y], true)],
        ),
        t(
            "radial",
            Overview,
            A::Mean,
            vec![ch("radius", N, &[Val], true), ch("color", N, &[X, Y], true)],
        ),
        t("horizon", Trend, A::None, paired()),
        t("line", Trend, A::None, paired()),
        t(
            "scatter",
            Correlation,
            A::None,
            vec![
                ch("x", H, &[Val], true),
                ch("y", V, &[Val], true),
                ch("color", N, &[X, Y], false),
            ],
        ),
        t(
            "heatmap",
            Correlation,
            A::None,
            vec![
                ch("x", H, &[X], true),
                ch("y", V, &[Y], true),
                ch("color", N, &[Val], true),
            ],
        ),
    ]
}

pub fn find_template(id: &str) -> Option<VisTemplate> {
    template_catalog().into_iter().find(|t| t.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_sixteen_stable_entries() {
        let c = template_catalog();
        assert_eq!(c.len(), 16);
        assert_eq!(c.iter().filter(|t| t.category == Category::Unit).count(), 3);
        let mut ids: Vec<&str> = c.iter().map(|t| t.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 16);
        assert_eq!(find_template("ranged_dot").unwrap().aggregation, Aggregation::MinMax);
    }

    #[test]
    fn positional_channels_respect_orientation() {
        for t in template_catalog() {
            for c in &t.channels {
                match c.orientation {
                    Orientation::Horizontal => {
                        assert!(!c.accepted_roles.contains(&Role::YNominal), "{}.{}", t.id, c.channel_name)
                    }
                    Orientation::Vertical => {
                        assert!(!c.accepted_roles.contains(&Role::XNominal), "{}.{}", t.id, c.channel_name)
                    }
                    Orientation::None => {}
                }
            }
        }
    }
}
