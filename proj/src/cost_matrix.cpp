#include "taskplan/cost_matrix.hpp"

#include <cmath>

#include "taskplan/errors.hpp"

namespace taskplan {

CostMatrix::CostMatrix(std::size_t owner, std::size_t task_count, double base_cost)
    : owner_(owner), dim_(task_count + 1), base_cost_(base_cost), data_(dim_ * dim_, 0.0) {}

double CostMatrix::sequence_cost(std::span<const std::size_t> slots) const {
  if (slots.empty()) return base_cost_;
  double total = 0.0;
  std::size_t prev = 0;
  for (std::size_t s : slots) {
    if (s + 1 >= dim_) throw ContractError("task slot out of range for cost matrix");
    total += at(prev, s + 1);
    prev = s + 1;
  }
  return total;
}

bool CostMatrix::all_integral() const {
  for (double v : data_)
    if (std::isfinite(v) && v != std::floor(v)) return false;
  return std::floor(base_cost_) == base_cost_;
}

nlohmann::json to_json(std::span<const CostMatrix> matrices) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : matrices) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t k = 0; k < m.dim(); ++k) {
        double v = m.at(j, k);
        if (std::isfinite(v))
          row.push_back(v);
        else
          row.push_back(nullptr);
      }
      rows.push_back(std::move(row));
    }
    out.push_back({{"owner", m.owner()}, {"base_cost", m.base_cost()}, {"entries", rows}});
  }
  return out;
}

std::vector<CostMatrix> matrices_from_json(const nlohmann::json& doc) {
  std::vector<CostMatrix> out;
  for (const auto& item : doc) {
    const auto& rows = item.at("entries");
    const std::size_t dim = rows.size();
    if (dim == 0) throw ContractError("cost matrix must have at least one row");
    CostMatrix m(item.at("owner").get<std::size_t>(), dim - 1,
                 item.value("base_cost", 0.0));
    for (std::size_t j = 0; j < dim; ++j) {
      if (rows[j].size() != dim) throw ContractError("cost matrix is not square");
      for (std::size_t k = 0; k < dim; ++k)
        m.at(j, k) = rows[j][k].is_null() ? kInfeasibleCost : rows[j][k].get<double>();
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace taskplan
