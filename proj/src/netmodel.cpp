#include "freight/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <iomanip>

namespace freight {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#') break;
        out.push_back(tok);
    }
    return out;
}

double parse_double(const std::string& tok, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    }
}

int parse_int(const std::string& tok, int line_no, const char* what) {
    double v = parse_double(tok, line_no, what);
    if (v != std::floor(v))
        throw InputError("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    return static_cast<int>(v);
}

}  // namespace

double free_flow_link_time(const Link& l) {
    double ratio = l.x_lp / l.eps_c;
    return l.eps_a + l.eps_b * ratio * ratio * ratio * ratio;
}

void Network::rebuild_adjacency() {
    out_links.assign(n_nodes + 1, {});
    link_index.clear();
    for (int i = 0; i < num_links(); ++i) {
        out_links[links[i].tail].push_back(i);
        link_index[links[i].id] = i;
    }
}

void Network::validate() const {
    if (n_nodes <= 0) throw InputError("network has no nodes");
    std::set<std::string> ids;
    for (const Link& l : links) {
        if (l.tail < 1 || l.tail > n_nodes || l.head < 1 || l.head > n_nodes)
            throw InputError("link " + l.id + ": unknown node reference");
        if (!ids.insert(l.id).second)
            throw InputError("duplicate link id " + l.id);
        if (l.eps_a < 0 || l.eps_b < 0)
            throw InputError("link " + l.id + ": negative BPR coefficient");
        if (l.eps_c <= 0)
            throw InputError("link " + l.id + ": capacity must be positive");
        if (l.x_lp < 0)
            throw InputError("link " + l.id + ": negative passenger volume");
    }
}

Network parse_network(const std::string& text) {
    Network net;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool have_nodes = false;
    while (std::getline(is, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] == "nodes") {
            if (toks.size() != 2) throw InputError("line " + std::to_string(line_no) + ": expected 'nodes <count>'");
            net.n_nodes = parse_int(toks[1], line_no, "node count");
            if (net.n_nodes <= 0) throw InputError("line " + std::to_string(line_no) + ": node count must be positive");
            have_nodes = true;
        } else if (toks[0] == "link") {
            if (!have_nodes) throw InputError("line " + std::to_string(line_no) + ": 'link' before 'nodes'");
            if (toks.size() != 8)
                throw InputError("line " + std::to_string(line_no) +
                                 ": expected 'link <id> <tail> <head> <eps_a> <eps_b> <eps_c> <x_lp>'");
            Link l;
            l.id = toks[1];
            l.tail = parse_int(toks[2], line_no, "tail node");
            l.head = parse_int(toks[3], line_no, "head node");
            l.eps_a = parse_double(toks[4], line_no, "eps_a");
            l.eps_b = parse_double(toks[5], line_no, "eps_b");
            l.eps_c = parse_double(toks[6], line_no, "eps_c");
            l.x_lp = parse_double(toks[7], line_no, "x_lp");
            if (l.tail < 1 || l.tail > net.n_nodes || l.head < 1 || l.head > net.n_nodes)
                throw InputError("line " + std::to_string(line_no) + ": unknown node reference on link " + l.id);
            if (net.link_index.count(l.id))
                throw InputError("line " + std::to_string(line_no) + ": duplicate link id " + l.id);
            if (l.eps_c <= 0)
                throw InputError("line " + std::to_string(line_no) + ": capacity must be positive on link " + l.id);
            if (l.eps_a < 0 || l.eps_b < 0 || l.x_lp < 0)
                throw InputError("line " + std::to_string(line_no) + ": negative parameter on link " + l.id);
            net.link_index[l.id] = net.num_links();
            net.links.push_back(std::move(l));
        } else {
            throw InputError("line " + std::to_string(line_no) + ": unrecognized directive '" + toks[0] + "'");
        }
    }
    if (!have_nodes) throw InputError("missing 'nodes' header");
    net.rebuild_adjacency();
    net.validate();
    return net;
}

std::string serialize_network(const Network& net) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "nodes " << net.n_nodes << "\n";
    for (const Link& l : net.links)
        os << "link " << l.id << " " << l.tail << " " << l.head << " "
           << l.eps_a << " " << l.eps_b << " " << l.eps_c << " " << l.x_lp << "\n";
    return os.str();
}

Network import_tntp(const std::string& text) {
    Network net;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool in_body = false;
    int link_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        // strip TNTP comments
        auto tilde = line.find('~');
        std::string body = tilde == std::string::npos ? line : line.substr(0, tilde);
        if (body.find("<NUMBER OF NODES>") != std::string::npos) {
            std::istringstream ls(body.substr(body.find('>') + 1));
            ls >> net.n_nodes;
            continue;
        }
        if (body.find("<END OF METADATA>") != std::string::npos) {
            in_body = true;
            continue;
        }
        if (body.find('<') != std::string::npos) continue;  // other metadata
        if (!in_body) continue;
        std::istringstream ls(body);
        double init, term, cap, length, fft, b, power, speed, toll, type;
        if (!(ls >> init >> term >> cap >> length >> fft >> b >> power >> speed >> toll >> type))
            continue;  // blank or separator line
        Link l;
        l.id = "e" + std::to_string(++link_no);
        l.tail = static_cast<int>(init);
        l.head = static_cast<int>(term);
        l.eps_a = fft;
        l.eps_b = b * fft;
        l.eps_c = cap;
        l.x_lp = 0;
        if (l.eps_c <= 0)
            throw InputError("tntp line " + std::to_string(line_no) + ": capacity must be positive");
        net.links.push_back(std::move(l));
    }
    if (net.n_nodes <= 0) throw InputError("tntp: missing <NUMBER OF NODES>");
    net.rebuild_adjacency();
    net.validate();
    return net;
}

namespace {

struct PathCand {
    double cost;
    std::vector<int> links;

    // ranking key: cost, then lexicographic link-id sequence
    bool better_than(const PathCand& o, const Network& net) const {
        if (cost != o.cost) return cost < o.cost;
        auto ids = [&](const std::vector<int>& ls) {
            std::vector<std::string> v;
            for (int i : ls) v.push_back(net.links[i].id);
            return v;
        };
        return ids(links) < ids(o.links);
    }
};

// Dijkstra over enabled links/nodes; deterministic tie-break by smaller
// link-id sequence of the whole path.
std::optional<PathCand> shortest_path(const Network& net, int src, int dst,
                                      const std::vector<char>& link_ok,
                                      const std::vector<char>& node_ok,
                                      const std::vector<double>& metric) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(net.n_nodes + 1, inf);
    std::vector<int> via(net.n_nodes + 1, -1);
    std::vector<char> done(net.n_nodes + 1, 0);
    dist[src] = 0;
    for (;;) {
        int u = -1;
        double best = inf;
        for (int n = 1; n <= net.n_nodes; ++n)
            if (!done[n] && dist[n] < best) { best = dist[n]; u = n; }
        if (u < 0) break;
        done[u] = 1;
        if (u == dst) break;
        for (int li : net.out_links[u]) {
            if (!link_ok[li]) continue;
            const Link& l = net.links[li];
            if (!node_ok[l.head] || done[l.head]) continue;
            double nd = dist[u] + metric[li];
            if (nd < dist[l.head] ||
                (nd == dist[l.head] && via[l.head] >= 0 && net.links[li].id < net.links[via[l.head]].id)) {
                dist[l.head] = nd;
                via[l.head] = li;
            }
        }
    }
    if (dist[dst] == inf) return std::nullopt;
    PathCand p;
    p.cost = dist[dst];
    for (int n = dst; n != src;) {
        p.links.push_back(via[n]);
        n = net.links[via[n]].tail;
    }
    std::reverse(p.links.begin(), p.links.end());
    return p;
}

}  // namespace

std::vector<Route> enumerate_k_least_congested(const Network& net, int od_index,
                                               std::pair<int, int> od, int k) {
    if (k < 1) throw InputError("route count k must be >= 1");
    auto [src, dst] = od;
    std::vector<double> metric(net.num_links());
    for (int i = 0; i < net.num_links(); ++i) metric[i] = free_flow_link_time(net.links[i]);
    std::vector<char> all_links(net.num_links(), 1), all_nodes(net.n_nodes + 1, 1);

    auto first = shortest_path(net, src, dst, all_links, all_nodes, metric);
    if (!first)
        throw InputError("OD pair (" + std::to_string(src) + "," + std::to_string(dst) + ") is disconnected");

    std::vector<PathCand> accepted{*first};
    std::vector<PathCand> candidates;

    while (static_cast<int>(accepted.size()) < k) {
        const PathCand& prev = accepted.back();
        // spur from every node of the previous path (Yen)
        std::vector<int> path_nodes{src};
        for (int li : prev.links) path_nodes.push_back(net.links[li].head);
        for (std::size_t i = 0; i + 1 < path_nodes.size(); ++i) {
            int spur = path_nodes[i];
            std::vector<int> root(prev.links.begin(), prev.links.begin() + i);
            std::vector<char> link_ok(net.num_links(), 1), node_ok(net.n_nodes + 1, 1);
            for (const PathCand& p : accepted) {
                if (p.links.size() > i &&
                    std::equal(root.begin(), root.end(), p.links.begin()))
                    link_ok[p.links[i]] = 0;
            }
            for (std::size_t j = 0; j < i; ++j) node_ok[path_nodes[j]] = 0;
            auto spur_path = shortest_path(net, spur, dst, link_ok, node_ok, metric);
            if (!spur_path) continue;
            PathCand cand;
            cand.links = root;
            cand.links.insert(cand.links.end(), spur_path->links.begin(), spur_path->links.end());
            cand.cost = 0;
            for (int li : cand.links) cand.cost += metric[li];
            bool known = std::any_of(accepted.begin(), accepted.end(),
                                     [&](const PathCand& p) { return p.links == cand.links; }) ||
                         std::any_of(candidates.begin(), candidates.end(),
                                     [&](const PathCand& p) { return p.links == cand.links; });
            if (!known) candidates.push_back(std::move(cand));
        }
        if (candidates.empty()) break;  // simple paths exhausted
        auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [&](const PathCand& a, const PathCand& b) { return a.better_than(b, net); });
        accepted.push_back(*best);
        candidates.erase(best);
    }

    std::vector<Route> out;
    for (const PathCand& p : accepted) {
        Route r;
        r.od = od_index;
        r.links = p.links;
        out.push_back(std::move(r));
    }
    return out;
}

void ProblemInstance::validate() const {
    network.validate();
    if (od_pairs.empty()) throw InputError("instance has no OD pairs");
    if (classes.empty()) throw InputError("instance has no classes");
    if (scenarios.empty()) throw InputError("instance has no scenarios");
    if (lambda < 0 || lambda > 1 || mu < 0 || mu > 1)
        throw InputError("lambda and mu must lie in [0,1]");
    if (pce <= 0) throw InputError("pce must be positive");
    std::set<double> vots;
    for (const VotClass& c : classes) {
        if (c.vot <= 0) throw InputError("class VOT must be positive");
        if (!vots.insert(c.vot).second) throw InputError("duplicate class VOT " + std::to_string(c.vot));
    }
    double psum = 0;
    for (const DemandScenario& s : scenarios) {
        if (s.probability <= 0) throw InputError("scenario probability must be positive");
        psum += s.probability;
        if (static_cast<int>(s.demand.size()) != n_od())
            throw InputError("scenario demand matrix has wrong OD dimension");
        for (const auto& row : s.demand) {
            if (static_cast<int>(row.size()) != n_classes())
                throw InputError("scenario demand matrix has wrong class dimension");
            for (double d : row)
                if (d < 0) throw InputError("negative demand entry");
        }
    }
    if (std::abs(psum - 1.0) > 1e-9)
        throw InputError("scenario probabilities sum to " + std::to_string(psum) + ", expected 1");
    if (static_cast<int>(routes.size()) != n_od()) throw InputError("route sets do not match OD pairs");
    for (int j = 0; j < n_od(); ++j) {
        if (routes[j].empty()) throw InputError("OD pair " + std::to_string(j + 1) + " has no routes");
        for (const Route& r : routes[j]) {
            if (r.od != j) throw InputError("route has wrong OD index");
            if (r.links.empty()) throw InputError("empty route");
            int at = od_pairs[j].first;
            std::set<int> seen{at};
            for (int li : r.links) {
                if (li < 0 || li >= network.num_links()) throw InputError("route references unknown link");
                const Link& l = network.links[li];
                if (l.tail != at) throw InputError("route links are not consecutive");
                at = l.head;
                if (!seen.insert(at).second) throw InputError("route revisits a node");
            }
            if (at != od_pairs[j].second) throw InputError("route does not end at destination");
        }
    }
}

ProblemInstance load_instance(const std::string& config, const Network& net) {
    ProblemInstance inst;
    inst.network = net;
    std::istringstream is(config);
    std::string line, section;
    int line_no = 0;
    int k_routes = 0;
    std::vector<std::tuple<int, std::vector<std::string>>> explicit_routes;
    DemandScenario* cur_scenario = nullptr;
    while (std::getline(is, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0].front() == '[' && toks[0].back() == ']') {
            section = toks[0].substr(1, toks[0].size() - 2);
            continue;
        }
        auto need = [&](std::size_t n, const char* fmt) {
            if (toks.size() < n)
                throw InputError("line " + std::to_string(line_no) + " [" + section + "]: expected " + fmt);
        };
        if (section == "classes") {
            if (toks[0] != "vot") throw InputError("line " + std::to_string(line_no) + ": expected 'vot <value>'");
            need(2, "'vot <value>'");
            VotClass c;
            c.index = inst.n_classes();
            c.vot = parse_double(toks[1], line_no, "vot");
            inst.classes.push_back(c);
        } else if (section == "od_pairs") {
            if (toks[0] != "od") throw InputError("line " + std::to_string(line_no) + ": expected 'od <origin> <destination>'");
            need(3, "'od <origin> <destination>'");
            inst.od_pairs.emplace_back(parse_int(toks[1], line_no, "origin"),
                                       parse_int(toks[2], line_no, "destination"));
        } else if (section == "routes") {
            if (toks[0] == "k") {
                need(2, "'k <count>'");
                k_routes = parse_int(toks[1], line_no, "route count");
            } else if (toks[0] == "route") {
                need(3, "'route <od> <link-id>...'");
                int od = parse_int(toks[1], line_no, "od index");
                explicit_routes.emplace_back(od, std::vector<std::string>(toks.begin() + 2, toks.end()));
            } else {
                throw InputError("line " + std::to_string(line_no) + ": expected 'k' or 'route'");
            }
        } else if (section == "scenarios") {
            if (toks[0] == "scenario") {
                need(2, "'scenario <probability>'");
                DemandScenario s;
                s.index = inst.n_scenarios();
                s.probability = parse_double(toks[1], line_no, "probability");
                inst.scenarios.push_back(std::move(s));
                cur_scenario = &inst.scenarios.back();
            } else if (toks[0] == "demand") {
                if (!cur_scenario)
                    throw InputError("line " + std::to_string(line_no) + ": 'demand' before 'scenario'");
                std::vector<double> row;   // one class, all OD pairs
                for (std::size_t i = 1; i < toks.size(); ++i)
                    row.push_back(parse_double(toks[i], line_no, "demand"));
                // rows are per class; store transposed into demand[j][w] later
                cur_scenario->demand.push_back(std::move(row));
            } else {
                throw InputError("line " + std::to_string(line_no) + ": expected 'scenario' or 'demand'");
            }
        } else if (section == "weights") {
            need(2, "'<name> <value>'");
            double v = parse_double(toks[1], line_no, toks[0].c_str());
            if (toks[0] == "lambda") inst.lambda = v;
            else if (toks[0] == "mu") inst.mu = v;
            else if (toks[0] == "pce") inst.pce = v;
            else throw InputError("line " + std::to_string(line_no) + ": unknown weight '" + toks[0] + "'");
        } else {
            throw InputError("line " + std::to_string(line_no) + ": content outside a known section");
        }
    }

    // demand rows came in class-major layout; transpose to demand[j][w]
    for (DemandScenario& s : inst.scenarios) {
        if (static_cast<int>(s.demand.size()) != inst.n_classes())
            throw InputError("scenario " + std::to_string(s.index + 1) + ": expected one demand row per class");
        for (const auto& row : s.demand)
            if (static_cast<int>(row.size()) != inst.n_od())
                throw InputError("scenario " + std::to_string(s.index + 1) + ": demand row length must equal OD count");
        std::vector<std::vector<double>> byod(inst.n_od(), std::vector<double>(inst.n_classes()));
        for (int w = 0; w < inst.n_classes(); ++w)
            for (int j = 0; j < inst.n_od(); ++j)
                byod[j][w] = s.demand[w][j];
        s.demand = std::move(byod);
    }

    double psum = 0;
    for (const DemandScenario& s : inst.scenarios) psum += s.probability;
    if (std::abs(psum - 1.0) > 1e-9)
        throw InputError("[scenarios] probabilities sum to " + std::to_string(psum) + ", expected 1");

    inst.routes.assign(inst.n_od(), {});
    if (k_routes > 0) {
        for (int j = 0; j < inst.n_od(); ++j)
            inst.routes[j] = enumerate_k_least_congested(net, j, inst.od_pairs[j], k_routes);
    }
    for (auto& [od, ids] : explicit_routes) {
        if (od < 1 || od > inst.n_od())
            throw InputError("[routes] route references unknown OD index " + std::to_string(od));
        Route r;
        r.od = od - 1;
        for (const std::string& id : ids) {
            auto it = net.link_index.find(id);
            if (it == net.link_index.end())
                throw InputError("[routes] unknown link id '" + id + "'");
            r.links.push_back(it->second);
        }
        inst.routes[od - 1].push_back(std::move(r));
    }
    inst.validate();
    return inst;
}

std::string serialize_instance(const ProblemInstance& inst) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "[classes]\n";
    for (const VotClass& c : inst.classes) os << "vot " << c.vot << "\n";
    os << "[od_pairs]\n";
    for (auto [o, d] : inst.od_pairs) os << "od " << o << " " << d << "\n";
    os << "[routes]\n";
    for (int j = 0; j < inst.n_od(); ++j)
        for (const Route& r : inst.routes[j]) {
            os << "route " << (j + 1);
            for (int li : r.links) os << " " << inst.network.links[li].id;
            os << "\n";
        }
    os << "[scenarios]\n";
    for (const DemandScenario& s : inst.scenarios) {
        os << "scenario " << s.probability << "\n";
        for (int w = 0; w < inst.n_classes(); ++w) {
            os << "demand";
            for (int j = 0; j < inst.n_od(); ++j) os << " " << s.demand[j][w];
            os << "\n";
        }
    }
    os << "[weights]\n";
    os << "lambda " << inst.lambda << "\nmu " << inst.mu << "\npce " << inst.pce << "\n";
    return os.str();
}

void SyntheticSpec::validate() const {
    if (n_od < 1 || n_classes < 1 || n_scenarios < 1 || k_routes < 1)
        throw InputError("synthetic spec counts must be positive");
    auto range_ok = [](double lo, double hi) { return lo > 0 && hi >= lo; };
    if (!range_ok(eps_a_min, eps_a_max) || !range_ok(eps_b_min, eps_b_max) ||
        !range_ok(eps_c_min, eps_c_max) || !range_ok(demand_min, demand_max))
        throw InputError("synthetic spec ranges must be positive");
    if (x_lp_min < 0 || x_lp_max < x_lp_min) throw InputError("bad x_lp range");
}

ProblemInstance gen_synthetic(const Network& net, std::uint64_t seed, const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    ProblemInstance inst;
    inst.network = net;
    for (Link& l : inst.network.links) {
        l.eps_a = uni(spec.eps_a_min, spec.eps_a_max);
        l.eps_b = uni(spec.eps_b_min, spec.eps_b_max);
        l.eps_c = uni(spec.eps_c_min, spec.eps_c_max);
        l.x_lp = uni(spec.x_lp_min, spec.x_lp_max);
    }
    inst.lambda = spec.lambda;
    inst.mu = spec.mu;
    inst.pce = spec.pce;

    for (int w = 0; w < spec.n_classes; ++w) {
        VotClass c;
        c.index = w;
        if (w < static_cast<int>(spec.vots.size())) {
            c.vot = spec.vots[w];
        } else {
            do {
                c.vot = uni(spec.vot_min, spec.vot_max);
            } while (std::any_of(inst.classes.begin(), inst.classes.end(),
                                 [&](const VotClass& o) { return o.vot == c.vot; }));
        }
        inst.classes.push_back(c);
    }

    // connected OD pairs, distinct, origin != destination
    std::set<std::pair<int, int>> chosen;
    std::uniform_int_distribution<int> node_pick(1, inst.network.n_nodes);
    int guard = 0;
    while (static_cast<int>(chosen.size()) < spec.n_od) {
        if (++guard > 100000) throw InputError("could not draw enough connected OD pairs");
        int o = node_pick(rng), d = node_pick(rng);
        if (o == d || chosen.count({o, d})) continue;
        try {
            enumerate_k_least_congested(inst.network, 0, {o, d}, 1);
        } catch (const InputError&) {
            continue;
        }
        chosen.insert({o, d});
        inst.od_pairs.emplace_back(o, d);
    }
    inst.routes.assign(spec.n_od, {});
    for (int j = 0; j < spec.n_od; ++j)
        inst.routes[j] = enumerate_k_least_congested(inst.network, j, inst.od_pairs[j], spec.k_routes);

    for (int c = 0; c < spec.n_scenarios; ++c) {
        DemandScenario s;
        s.index = c;
        s.probability = 1.0 / spec.n_scenarios;
        s.demand.assign(spec.n_od, std::vector<double>(spec.n_classes));
        for (int j = 0; j < spec.n_od; ++j)
            for (int w = 0; w < spec.n_classes; ++w)
                s.demand[j][w] = uni(spec.demand_min, spec.demand_max);
        inst.scenarios.push_back(std::move(s));
    }
    // make probabilities sum to exactly one
    double acc = 0;
    for (std::size_t i = 0; i + 1 < inst.scenarios.size(); ++i) acc += inst.scenarios[i].probability;
    inst.scenarios.back().probability = 1.0 - acc;

    inst.validate();
    return inst;
}

const std::vector<std::pair<int, int>>& sioux_falls_arcs() {
    static const std::vector<std::pair<int, int>> arcs = {
        {1, 2},  {1, 3},  {2, 1},  {2, 6},  {3, 1},  {3, 4},  {3, 12}, {4, 3},  {4, 5},  {4, 11},
        {5, 4},  {5, 6},  {5, 9},  {6, 2},  {6, 5},  {6, 8},  {7, 8},  {7, 18}, {8, 6},  {8, 7},
        {8, 9},  {8, 16}, {9, 5},  {9, 8},  {9, 10}, {10, 9}, {10, 11},{10, 15},{10, 16},{10, 17},
        {11, 4}, {11, 10},{11, 12},{11, 14},{12, 3}, {12, 11},{12, 13},{13, 12},{13, 24},{14, 11},
        {14, 15},{14, 23},{15, 10},{15, 14},{15, 19},{15, 22},{16, 8}, {16, 10},{16, 17},{16, 18},
        {17, 10},{17, 16},{17, 19},{18, 7}, {18, 16},{18, 20},{19, 15},{19, 17},{19, 20},{20, 18},
        {20, 19},{20, 21},{20, 22},{21, 20},{21, 22},{21, 24},{22, 15},{22, 20},{22, 21},{22, 23},
        {23, 14},{23, 22},{23, 24},{24, 13},{24, 21},{24, 23}};
    return arcs;
}

Network sioux_falls_network() {
    Network net;
    net.n_nodes = 24;
    int k = 0;
    for (auto [t, h] : sioux_falls_arcs()) {
        Link l;
        l.id = "e" + std::to_string(++k);
        l.tail = t;
        l.head = h;
        l.eps_a = 1;
        l.eps_b = 1;
        l.eps_c = 1;
        l.x_lp = 0;
        net.links.push_back(std::move(l));
    }
    net.rebuild_adjacency();
    net.validate();
    return net;
}

}  // namespace freight
