#include "dvrpsr/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "dvrpsr/knapsack.hpp"
#include "dvrpsr/log.hpp"
#include "dvrpsr/lp.hpp"
#include "dvrpsr/partition.hpp"

namespace dvrpsr {

AuxGraph build_aux_graph(std::span<const Request> statics, const TravelTimeOracle& oracle,
                         double horizon) {
    AuxGraph aux;
    aux.depot = oracle.graph().depot();
    std::map<NodeId, std::vector<Request>> groups;
    for (const Request& r : statics) {
        if (r.node == aux.depot) throw Error("static request at the depot");
        double loop = oracle.travel_time(aux.depot, r.node) + r.duration +
                      oracle.travel_time(r.node, aux.depot);
        if (loop > horizon)
            throw Error("static request " + std::to_string(r.id) +
                        " cannot be served within the horizon");
        groups[r.node].push_back(r);
    }
    for (auto& [node, reqs] : groups) {
        AuxCustomer c;
        c.street_node = node;
        c.requests = reqs;
        for (const Request& r : reqs) c.service += r.duration;
        aux.customers.push_back(std::move(c));
    }
    const int n = aux.size();
    if (n > kMaxAuxCustomers)
        throw Error("too many distinct static-request nodes for the pricing labeler");
    aux.time.assign(n + 1, std::vector<double>(n + 1, 0.0));
    auto node_of = [&](int i) { return i == 0 ? aux.depot : aux.customers[i - 1].street_node; };
    for (int i = 0; i <= n; ++i) {
        auto tree = oracle.tree_from(node_of(i));
        for (int j = 0; j <= n; ++j)
            if (i != j) aux.time[i][j] = tree->dist_min[node_of(j)];
    }
    // A grouped node must fit in a dedicated route, else no column can cover it.
    for (int c = 0; c < n; ++c)
        if (aux.time[0][c + 1] + aux.customers[c].service + aux.time[c + 1][0] > horizon)
            throw Error("grouped static requests at node " +
                        std::to_string(aux.customers[c].street_node) +
                        " exceed the horizon together");
    return aux;
}

namespace {

using NgSet = std::bitset<kMaxAuxCustomers>;

struct PricingLabel {
    int customer;  // 0-based customer index
    double redcost;
    double duration;  // elapsed from depot through serving `customer`
    NgSet memory;
    int parent;
    bool alive = true;
};

bool subset_of(const NgSet& a, const NgSet& b) { return (a & ~b).none(); }

Column close_column(const AuxGraph& aux, const std::vector<PricingLabel>& arena, int label) {
    Column col;
    for (int cur = label; cur >= 0; cur = arena[cur].parent)
        col.visits.push_back(arena[cur].customer);
    std::reverse(col.visits.begin(), col.visits.end());
    col.cost = 0.0;
    int prev = 0;
    for (int c : col.visits) {
        col.cost += aux.time[prev][c + 1] + aux.customers[c].service;
        prev = c + 1;
    }
    col.cost += aux.time[prev][0];
    col.covers = col.visits;
    std::sort(col.covers.begin(), col.covers.end());
    col.covers.erase(std::unique(col.covers.begin(), col.covers.end()), col.covers.end());
    col.elementary = col.covers.size() == col.visits.size();
    return col;
}

}  // namespace

std::vector<Column> price_columns(const AuxGraph& aux, std::span<const double> customer_duals,
                                  double fleet_dual, double horizon, int ng_size,
                                  int max_columns) {
    const int n = aux.size();
    if (n == 0) return {};

    // ng neighborhoods: each customer plus its ng_size nearest customers.
    std::vector<NgSet> ng(n);
    for (int v = 0; v < n; ++v) {
        std::vector<int> others;
        for (int u = 0; u < n; ++u)
            if (u != v) others.push_back(u);
        std::sort(others.begin(), others.end(), [&](int a, int b) {
            double ta = aux.time[v + 1][a + 1], tb = aux.time[v + 1][b + 1];
            return ta != tb ? ta < tb : a < b;
        });
        ng[v].set(v);
        for (int i = 0; i < std::min<int>(ng_size, static_cast<int>(others.size())); ++i)
            ng[v].set(others[i]);
    }

    std::vector<PricingLabel> arena;
    std::vector<std::vector<int>> at_node(n);
    std::deque<int> open;
    constexpr std::size_t kLabelCap = 2'000'000;

    auto try_insert = [&](PricingLabel label) {
        auto& bucket = at_node[label.customer];
        for (int idx : bucket) {
            const PricingLabel& other = arena[idx];
            if (!other.alive) continue;
            if (other.redcost <= label.redcost + 1e-12 &&
                other.duration <= label.duration + 1e-12 && subset_of(other.memory, label.memory))
                return;  // dominated
        }
        for (int idx : bucket) {
            PricingLabel& other = arena[idx];
            if (!other.alive) continue;
            if (label.redcost <= other.redcost + 1e-12 &&
                label.duration <= other.duration + 1e-12 && subset_of(label.memory, other.memory))
                other.alive = false;
        }
        int id = static_cast<int>(arena.size());
        arena.push_back(std::move(label));
        bucket.push_back(id);
        open.push_back(id);
    };

    for (int v = 0; v < n; ++v) {
        PricingLabel label;
        label.customer = v;
        label.duration = aux.time[0][v + 1] + aux.customers[v].service;
        label.redcost = label.duration - customer_duals[v];
        label.memory.set(v);
        label.parent = -1;
        if (label.duration + aux.time[v + 1][0] <= horizon + 1e-9) try_insert(std::move(label));
    }

    bool truncated = false;
    while (!open.empty()) {
        int cur = open.front();
        open.pop_front();
        if (!arena[cur].alive) continue;
        if (arena.size() > kLabelCap) {
            truncated = true;
            break;
        }
        const PricingLabel base = arena[cur];  // copy: arena may reallocate
        int u = base.customer;
        for (int v = 0; v < n; ++v) {
            if (v == u || base.memory.test(v)) continue;
            PricingLabel next;
            next.customer = v;
            next.duration = base.duration + aux.time[u + 1][v + 1] + aux.customers[v].service;
            if (next.duration + aux.time[v + 1][0] > horizon + 1e-9) continue;
            next.redcost = base.redcost + aux.time[u + 1][v + 1] + aux.customers[v].service -
                           customer_duals[v];
            next.memory = (base.memory & ng[v]);
            next.memory.set(v);
            next.parent = cur;
            try_insert(std::move(next));
        }
    }
    if (truncated)
        log::warn("pricing labeler truncated at %zu labels; round is heuristic", arena.size());

    std::vector<std::pair<double, int>> closings;
    for (int i = 0; i < static_cast<int>(arena.size()); ++i) {
        if (!arena[i].alive) continue;
        double total = arena[i].redcost + aux.time[arena[i].customer + 1][0] - fleet_dual;
        if (total < -1e-7) closings.push_back({total, i});
    }
    std::sort(closings.begin(), closings.end());
    std::vector<Column> out;
    std::map<std::vector<int>, bool> seen;
    for (auto [total, idx] : closings) {
        if (static_cast<int>(out.size()) >= max_columns) break;
        Column col = close_column(aux, arena, idx);
        if (seen.emplace(col.visits, true).second) out.push_back(std::move(col));
    }
    return out;
}

ColumnGenResult generate_columns(const AuxGraph& aux, double horizon, int fleet_size,
                                 int ng_size, int max_per_round) {
    ColumnGenResult result;
    const int n = aux.size();
    if (n == 0) return result;

    std::map<std::vector<int>, bool> in_pool;
    auto add_column = [&](Column col) {
        if (in_pool.emplace(col.visits, true).second) result.pool.push_back(std::move(col));
    };
    for (int v = 0; v < n; ++v) {  // single-customer seeds
        Column col;
        col.visits = {v};
        col.covers = {v};
        col.cost = aux.time[0][v + 1] + aux.customers[v].service + aux.time[v + 1][0];
        add_column(std::move(col));
    }

    // Master LP. The fleet row carries a big-M overflow variable so the
    // restricted master stays feasible while the pool is small.
    const double big_m = 10.0 * horizon * (n + 1);
    while (true) {
        ++result.rounds;
        LinearProgram lp;
        lp.sense = LpSense::kMin;
        for (const Column& col : result.pool)
            lp.add_var(col.cost, 0.0, std::numeric_limits<double>::infinity());
        int overflow = lp.add_var(big_m, 0.0, std::numeric_limits<double>::infinity());
        for (int c = 0; c < n; ++c) {
            std::vector<std::pair<int, double>> terms;
            for (std::size_t j = 0; j < result.pool.size(); ++j) {
                int visits = static_cast<int>(std::count(result.pool[j].visits.begin(),
                                                         result.pool[j].visits.end(), c));
                if (visits > 0) terms.push_back({static_cast<int>(j), double(visits)});
            }
            lp.add_row(std::move(terms), LpRel::kEq, 1.0);
        }
        {
            std::vector<std::pair<int, double>> fleet;
            for (std::size_t j = 0; j < result.pool.size(); ++j)
                fleet.push_back({static_cast<int>(j), 1.0});
            fleet.push_back({overflow, -1.0});
            lp.add_row(std::move(fleet), LpRel::kLe, static_cast<double>(fleet_size));
        }
        LpSolution sol = solve_lp(lp);
        if (sol.status != LpStatus::kOptimal)
            throw Error("column generation master LP failed");
        result.rmp_objective = sol.objective;
        if (result.rounds > 10000) throw Error("column generation did not converge");

        std::vector<double> duals(sol.duals.begin(), sol.duals.begin() + n);
        double fleet_dual = sol.duals[n];
        auto columns = price_columns(aux, duals, fleet_dual, horizon, ng_size, max_per_round);
        if (columns.empty()) {
            if (sol.primal[overflow] > 1e-7)
                throw Error("fleet too small to cover the static requests");
            break;
        }
        std::size_t before = result.pool.size();
        for (Column& col : columns) add_column(std::move(col));
        if (result.pool.size() == before) break;  // only duplicates priced
    }
    return result;
}

Route materialize_column(const AuxGraph& aux, const Column& column,
                         const TravelTimeOracle& oracle) {
    std::vector<Stop> keys;
    keys.push_back({aux.depot, {}});
    for (int c : column.visits) keys.push_back({aux.customers[c].street_node,
                                                aux.customers[c].requests});
    keys.push_back({aux.depot, {}});
    return build_route(oracle, keys);
}

namespace {

Plan plan_from_selection(const AuxGraph& aux, std::span<const Column> pool,
                         const std::vector<int>& chosen, const TravelTimeOracle& oracle) {
    Plan plan;
    for (int j : chosen) plan.routes.push_back(materialize_column(aux, pool[j], oracle));
    return plan;
}

}  // namespace

Plan plan_myopic(const AuxGraph& aux, std::span<const Column> pool, int fleet_size,
                 const TravelTimeOracle& oracle, double horizon) {
    (void)horizon;
    if (aux.size() == 0) return {};
    PartitionProblem problem;
    problem.universe = aux.size();
    problem.max_columns = fleet_size;
    problem.sense = PartitionSense::kMinimize;
    std::vector<int> index;
    for (std::size_t j = 0; j < pool.size(); ++j) {
        if (!pool[j].elementary) continue;
        problem.columns.push_back({pool[j].cost, pool[j].covers});
        index.push_back(static_cast<int>(j));
    }
    PartitionResult res = solve_partition(problem);
    std::vector<int> chosen;
    for (int j : res.chosen) chosen.push_back(index[j]);
    return plan_from_selection(aux, pool, chosen, oracle);
}

Plan plan_potential(const AuxGraph& aux, std::span<const Column> pool, int fleet_size,
                    std::span<const SamplePath> paths, const TravelTimeOracle& oracle,
                    double horizon) {
    if (aux.size() == 0) return {};
    PartitionProblem problem;
    problem.universe = aux.size();
    problem.max_columns = fleet_size;
    problem.sense = PartitionSense::kMaximize;
    std::vector<int> index;
    std::vector<Route> materialized;
    for (std::size_t j = 0; j < pool.size(); ++j) {
        if (!pool[j].elementary) continue;
        Route route = materialize_column(aux, pool[j], oracle);
        double coeff = route_potential_coefficient(route, paths, horizon, oracle);
        problem.columns.push_back({coeff, pool[j].covers});
        index.push_back(static_cast<int>(j));
        materialized.push_back(std::move(route));
    }
    PartitionResult res = solve_partition(problem);
    Plan plan;
    for (int j : res.chosen) plan.routes.push_back(materialized[j]);
    return plan;
}

std::vector<VehicleState> plan_fleet(const Plan& plan, int fleet_size) {
    if (static_cast<int>(plan.routes.size()) > fleet_size)
        throw Error("plan uses more routes than vehicles");
    std::vector<VehicleState> fleet(fleet_size);
    for (std::size_t k = 0; k < plan.routes.size(); ++k)
        fleet[k] = VehicleState::routing(0.0, plan.routes[k]);
    return fleet;
}

}  // namespace dvrpsr
