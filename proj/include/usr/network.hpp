#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "relevance.hpp"

namespace usr {

struct InteractionEdge {
    std::string source; // input variable
    std::string target;
    double weight { 0.0 }; // aggregated mean relevance of source for target
    std::size_t rank { 0 }; // 1 = most relevant

    bool operator==(const InteractionEdge&) const = default;
};

struct InteractionNetwork {
    std::vector<std::string> nodes; // dataset column order
    std::vector<InteractionEdge> edges; // grouped by target in node order, then by rank
    std::vector<std::pair<std::string, std::string>> bidirectional; // first precedes second in node order

    const InteractionEdge* find(std::string_view source, std::string_view target) const
    {
        for (const auto& e : edges) {
            if (e.source == source && e.target == target) {
                return &e;
            }
        }
        return nullptr;
    }

    bool is_bidirectional(std::string_view a, std::string_view b) const { return find(a, b) && find(b, a); }
};

struct NetworkOptions {
    std::size_t top_k { 3 };
    std::optional<double> min_target_r2; // drop inbound edges of targets whose median test R^2 is lower
};

/// All dataset columns of an aggregate in column order (inputs with the target put back).
inline std::vector<std::string> variables_of(const AggregatedRelevance& agg)
{
    auto vars = agg.inputs;
    const auto pos = std::min(agg.target_column, vars.size());
    vars.insert(vars.begin() + static_cast<std::ptrdiff_t>(pos), agg.target);
    return vars;
}

/// Top-k most relevant inputs of every target become edges input -> target. Inputs with zero
/// mean relevance never produce an edge; ties keep dataset column order.
inline InteractionNetwork build_network(std::span<const AggregatedRelevance> aggregates, const NetworkOptions& options = {},
    const std::map<std::string, double>& median_test_r2 = {})
{
    if (options.top_k == 0) {
        throw ConfigError("top_k", "must be at least 1");
    }
    InteractionNetwork net;
    if (aggregates.empty()) {
        return net;
    }
    net.nodes = variables_of(aggregates.front());
    std::set<std::string> seen_targets;
    for (const auto& agg : aggregates) {
        if (agg.mean.size() != agg.inputs.size()) {
            throw Error("aggregate for '" + agg.target + "' has " + std::to_string(agg.mean.size()) + " relevances for " + std::to_string(agg.inputs.size()) + " inputs");
        }
        if (variables_of(agg) != net.nodes) {
            throw Error("aggregate for '" + agg.target + "' covers a different variable set than '" + aggregates.front().target + "'");
        }
        if (!seen_targets.insert(agg.target).second) {
            throw Error("more than one aggregate for target '" + agg.target + "'");
        }
    }

    std::vector<const AggregatedRelevance*> by_column;
    for (const auto& agg : aggregates) {
        by_column.push_back(&agg);
    }
    std::sort(by_column.begin(), by_column.end(), [](auto* a, auto* b) { return a->target_column < b->target_column; });

    for (const auto* agg : by_column) {
        if (options.min_target_r2) {
            auto it = median_test_r2.find(agg->target);
            if (it == median_test_r2.end()) {
                throw Error("no median test R^2 for target '" + agg->target + "' although min_target_r2 is set");
            }
            if (it->second < *options.min_target_r2) {
                continue;
            }
        }
        std::vector<std::size_t> order(agg->inputs.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return agg->mean[i] > agg->mean[j]; });
        std::size_t rank = 0;
        for (auto i : order) {
            if (rank == options.top_k || !(agg->mean[i] > 0.0)) {
                break;
            }
            net.edges.push_back({ agg->inputs[i], agg->target, agg->mean[i], ++rank });
        }
    }

    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < net.nodes.size(); ++j) {
            if (net.is_bidirectional(net.nodes[i], net.nodes[j])) {
                net.bidirectional.emplace_back(net.nodes[i], net.nodes[j]);
            }
        }
    }
    return net;
}

namespace detail {
    inline std::string dot_quote(std::string_view s)
    {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') {
                out += '\\';
            }
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out += c;
        }
        return out + "\"";
    }

    inline std::string xml_escape(std::string_view s)
    {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
            }
        }
        return out;
    }

    inline std::string fixed3(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return buf;
    }
} // namespace detail

/// Graphviz digraph. A bidirectional pair is one edge with dir=both whose label lists the
/// forward and backward weights.
inline std::string export_dot(const InteractionNetwork& net)
{
    std::string out = "digraph variable_interactions {\n";
    out += "  node [shape=box];\n";
    for (const auto& n : net.nodes) {
        out += "  " + detail::dot_quote(n) + ";\n";
    }
    std::set<std::pair<std::string, std::string>> emitted;
    for (const auto& e : net.edges) {
        if (emitted.count({ e.target, e.source })) {
            continue;
        }
        out += "  " + detail::dot_quote(e.source) + " -> " + detail::dot_quote(e.target) + " [";
        if (const auto* back = net.find(e.target, e.source)) {
            out += "dir=both, label=\"" + detail::fixed3(e.weight) + " / " + detail::fixed3(back->weight) + "\"";
        } else {
            out += "label=\"" + detail::fixed3(e.weight) + "\"";
        }
        out += "];\n";
        emitted.insert({ e.source, e.target });
    }
    out += "}\n";
    return out;
}

/// GraphML with one directed edge per relevance arrow.
inline std::string export_graphml(const InteractionNetwork& net)
{
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
                      "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
                      "  <key id=\"rank\" for=\"edge\" attr.name=\"rank\" attr.type=\"int\"/>\n"
                      "  <key id=\"bidirectional\" for=\"edge\" attr.name=\"bidirectional\" attr.type=\"boolean\"/>\n"
                      "  <graph id=\"variable_interactions\" edgedefault=\"directed\">\n";
    for (const auto& n : net.nodes) {
        out += "    <node id=\"" + detail::xml_escape(n) + "\"/>\n";
    }
    for (const auto& e : net.edges) {
        out += "    <edge source=\"" + detail::xml_escape(e.source) + "\" target=\"" + detail::xml_escape(e.target) + "\">";
        out += "<data key=\"weight\">" + detail::fixed3(e.weight) + "</data>";
        out += "<data key=\"rank\">" + std::to_string(e.rank) + "</data>";
        out += std::string("<data key=\"bidirectional\">") + (net.is_bidirectional(e.source, e.target) ? "true" : "false") + "</data>";
        out += "</edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

} // namespace usr
