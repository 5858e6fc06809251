#include "relosim/io.hpp"

#include <fstream>

#include "relosim/csv.hpp"
#include "relosim/hedonic.hpp"

namespace relosim {

void write_cells_csv(const std::filesystem::path& path, std::span<const MeshCell> cells) {
    CsvTable table;
    table.header = {"id", "x", "y", "land_price", "housing_stock", "share_building",
                    "share_agricultural", "share_freshwater", "share_forest", "share_industrial",
                    "city", "employees_primary_secondary", "employees_tertiary", "in_daa",
                    "in_ufaa", "logsum_work", "logsum_education", "logsum_other"};
    for (const auto& c : cells) {
        table.rows.push_back({std::to_string(c.id), format_double(c.x), format_double(c.y),
                              format_double(c.land_price), format_double(c.housing_stock),
                              format_double(c.share_building), format_double(c.share_agricultural),
                              format_double(c.share_freshwater), format_double(c.share_forest),
                              format_double(c.share_industrial), to_string(c.city),
                              format_double(c.employees_primary_secondary),
                              format_double(c.employees_tertiary), c.in_daa ? "1" : "0",
                              c.in_ufaa ? "1" : "0", format_double(c.logsum_work),
                              format_double(c.logsum_education), format_double(c.logsum_other)});
    }
    write_csv(path, table);
}

std::vector<MeshCell> read_cells_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t id = table.column("id"), x = table.column("x"), y = table.column("y"),
                      lp = table.column("land_price"), hs = table.column("housing_stock"),
                      sb = table.column("share_building"), sa = table.column("share_agricultural"),
                      sw = table.column("share_freshwater"), sf = table.column("share_forest"),
                      si = table.column("share_industrial"), city = table.column("city"),
                      eps = table.column("employees_primary_secondary"),
                      et = table.column("employees_tertiary"), daa = table.column("in_daa"),
                      ufaa = table.column("in_ufaa"), lw = table.column("logsum_work"),
                      le = table.column("logsum_education"), lo = table.column("logsum_other");
    std::vector<MeshCell> cells;
    cells.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        MeshCell c;
        c.id = static_cast<CellId>(parse_int(row[id], "cell id"));
        c.x = parse_double(row[x], "cell x");
        c.y = parse_double(row[y], "cell y");
        c.land_price = parse_double(row[lp], "land_price");
        c.housing_stock = parse_double(row[hs], "housing_stock");
        c.share_building = parse_double(row[sb], "share_building");
        c.share_agricultural = parse_double(row[sa], "share_agricultural");
        c.share_freshwater = parse_double(row[sw], "share_freshwater");
        c.share_forest = parse_double(row[sf], "share_forest");
        c.share_industrial = parse_double(row[si], "share_industrial");
        c.city = city_from_string(row[city]);
        c.employees_primary_secondary = parse_double(row[eps], "employees_primary_secondary");
        c.employees_tertiary = parse_double(row[et], "employees_tertiary");
        c.in_daa = parse_int(row[daa], "in_daa") != 0;
        c.in_ufaa = parse_int(row[ufaa], "in_ufaa") != 0;
        c.logsum_work = parse_double(row[lw], "logsum_work");
        c.logsum_education = parse_double(row[le], "logsum_education");
        c.logsum_other = parse_double(row[lo], "logsum_other");
        cells.push_back(c);
    }
    return cells;
}

void write_households_csv(const std::filesystem::path& path,
                          std::span<const Household> households) {
    CsvTable table;
    table.header = {"id", "home_cell", "age_of_head", "n_workers", "n_students",
                    "n_unemployed", "n_members", "segment"};
    for (const auto& h : households)
        table.rows.push_back({std::to_string(h.id), std::to_string(h.home_cell),
                              std::to_string(h.age_of_head), std::to_string(h.n_workers),
                              std::to_string(h.n_students), std::to_string(h.n_unemployed),
                              std::to_string(h.n_members), std::to_string(h.segment)});
    write_csv(path, table);
}

std::vector<Household> read_households_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t id = table.column("id"), hc = table.column("home_cell"),
                      age = table.column("age_of_head"), w = table.column("n_workers"),
                      s = table.column("n_students"), u = table.column("n_unemployed"),
                      m = table.column("n_members"), seg = table.column("segment");
    std::vector<Household> households;
    households.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Household h;
        h.id = parse_int(row[id], "household id");
        h.home_cell = static_cast<CellId>(parse_int(row[hc], "home_cell"));
        h.age_of_head = static_cast<int>(parse_int(row[age], "age_of_head"));
        h.n_workers = static_cast<int>(parse_int(row[w], "n_workers"));
        h.n_students = static_cast<int>(parse_int(row[s], "n_students"));
        h.n_unemployed = static_cast<int>(parse_int(row[u], "n_unemployed"));
        h.n_members = static_cast<int>(parse_int(row[m], "n_members"));
        h.segment = static_cast<int>(parse_int(row[seg], "segment"));
        households.push_back(h);
    }
    return households;
}

void write_edges_csv(const std::filesystem::path& path, std::span<const NetworkEdge> edges) {
    CsvTable table;
    table.header = {"from_cell", "to_cell", "length_m"};
    for (const auto& e : edges)
        table.rows.push_back(
            {std::to_string(e.from), std::to_string(e.to), format_double(e.length_m)});
    write_csv(path, table);
}

std::vector<NetworkEdge> read_edges_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t f = table.column("from_cell"), t = table.column("to_cell"),
                      l = table.column("length_m");
    std::vector<NetworkEdge> edges;
    edges.reserve(table.rows.size());
    for (const auto& row : table.rows)
        edges.push_back({static_cast<CellId>(parse_int(row[f], "from_cell")),
                         static_cast<CellId>(parse_int(row[t], "to_cell")),
                         parse_double(row[l], "length_m")});
    return edges;
}

void write_moving_rates_csv(const std::filesystem::path& path, const MovingRateTable& table) {
    CsvTable csv;
    csv.header = {"age_min", "age_max", "did_not_move_ratio"};
    for (const auto& band : table.bands())
        csv.rows.push_back({std::to_string(band.age_min), std::to_string(band.age_max),
                            format_double(band.did_not_move_ratio)});
    write_csv(path, csv);
}

MovingRateTable read_moving_rates_csv(const std::filesystem::path& path) {
    const CsvTable csv = read_csv(path);
    const std::size_t lo = csv.column("age_min"), hi = csv.column("age_max"),
                      r = csv.column("did_not_move_ratio");
    std::vector<MovingRateBand> bands;
    for (const auto& row : csv.rows)
        bands.push_back({static_cast<int>(parse_int(row[lo], "age_min")),
                         static_cast<int>(parse_int(row[hi], "age_max")),
                         parse_double(row[r], "did_not_move_ratio")});
    return MovingRateTable(std::move(bands));
}

void write_coefficient_file(const std::filesystem::path& path,
                            const std::map<std::string, double>& values) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& [name, value] : values)
        out << name << ' ' << format_double(value) << '\n';
}

std::map<std::string, double> read_coefficient_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open coefficient file '" + path.string() + "'");
    std::map<std::string, double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const std::size_t sep = line.find_first_of(" \t=");
        if (sep == std::string::npos)
            continue;
        const std::string name = line.substr(0, sep);
        std::size_t vstart = line.find_first_not_of(" \t=", sep);
        if (name.empty() || vstart == std::string::npos)
            continue;
        std::size_t vend = line.find_last_not_of(" \t");
        values[name] = parse_double(line.substr(vstart, vend - vstart + 1), path.string());
    }
    return values;
}

std::vector<double> hedonic_coefficients_from_file(const std::filesystem::path& path) {
    const auto values = read_coefficient_file(path);
    std::vector<double> coefficients(kHedonicK, 0.0);
    for (const auto& [name, value] : values)
        coefficients[hedonic_index(name)] = value;
    return coefficients;
}

SegmentCoefficients segment_coefficients_from_file(const std::filesystem::path& path) {
    const auto values = read_coefficient_file(path);
    SegmentCoefficients c;
    for (const auto& [name, value] : values) {
        if (name == "segment")
            c.segment = static_cast<int>(value);
        else if (name == "aba_worker")
            c.alpha_worker = value;
        else if (name == "aba_student")
            c.alpha_student = value;
        else if (name == "aba_unemployed")
            c.alpha_unemployed = value;
        else if (name == "size_housing_stock") {
            if (value != 1.0)
                throw DataError("segment preset '" + path.string() +
                                "': the size coefficient is fixed at 1");
        } else
            c.beta[choice_index(name)] = value;
    }
    if (c.segment < 1 || c.segment > kNumSegments)
        throw DataError("segment preset '" + path.string() + "' missing a valid segment id");
    return c;
}

void write_segment_coefficients(const std::filesystem::path& path, const SegmentCoefficients& c) {
    std::map<std::string, double> values;
    values["segment"] = c.segment;
    values["aba_worker"] = c.alpha_worker;
    values["aba_student"] = c.alpha_student;
    values["aba_unemployed"] = c.alpha_unemployed;
    for (std::size_t j = 0; j < kChoiceK; ++j)
        values[choice_schema()[j]] = c.beta[j];
    values["size_housing_stock"] = 1.0;
    write_coefficient_file(path, values);
}

void write_hedonic_coefficients(const std::filesystem::path& path,
                                std::span<const double> coefficients) {
    if (coefficients.size() != kHedonicK)
        throw ContractError("write_hedonic_coefficients: wrong coefficient count");
    std::map<std::string, double> values;
    for (std::size_t j = 0; j < kHedonicK; ++j)
        values[hedonic_schema()[j]] = coefficients[j];
    write_coefficient_file(path, values);
}

void write_surface_csv(const std::filesystem::path& surface_path,
                       const std::filesystem::path& scaling_path,
                       const AccessibilitySurface& surface, const std::string& reference_name) {
    CsvTable table;
    table.header = {"scenario", "category", "cell_id", "raw_aba", "normalized_aba"};
    for (PersonCategory category : kPersonCategories)
        for (std::size_t cell = 0; cell < surface.n_cells(); ++cell)
            table.rows.push_back({surface.scenario(), to_string(category), std::to_string(cell),
                                  format_double(surface.raw(category, cell)),
                                  format_double(surface.normalized(category, cell))});
    if (surface.scenario() != reference_name) {
        for (PersonCategory category : kPersonCategories)
            for (std::size_t cell = 0; cell < surface.n_cells(); ++cell)
                table.rows.push_back({reference_name, to_string(category), std::to_string(cell),
                                      format_double(surface.reference_raw(category, cell)), "0"});
    }
    write_csv(surface_path, table);

    CsvTable scaling;
    scaling.header = {"category", "cell_id", "value", "delta_t"};
    for (PersonCategory category : kPersonCategories)
        for (std::size_t cell = 0; cell < surface.n_cells(); ++cell)
            scaling.rows.push_back({to_string(category), std::to_string(cell),
                                    format_double(surface.scaling(category, cell)), "1"});
    write_csv(scaling_path, scaling);
}

AccessibilitySurface read_surface_csv(const std::filesystem::path& surface_path,
                                      const std::filesystem::path& scaling_path,
                                      const std::string& scenario_name,
                                      const std::string& reference_name) {
    const CsvTable table = read_csv(surface_path);
    const std::size_t sc = table.column("scenario"), cat = table.column("category"),
                      cid = table.column("cell_id"), raw = table.column("raw_aba");

    std::size_t n_cells = 0;
    for (const auto& row : table.rows)
        n_cells = std::max(n_cells, static_cast<std::size_t>(parse_int(row[cid], "cell_id")) + 1);
    if (n_cells == 0)
        throw DataError("surface file '" + surface_path.string() + "' has no rows");

    AccessibilitySurface surface(scenario_name, n_cells);
    std::vector<char> have_raw(3 * n_cells, 0), have_ref(3 * n_cells, 0);
    std::vector<double> raws(3 * n_cells, 0.0), refs(3 * n_cells, 0.0);
    const bool self_reference = scenario_name == reference_name;
    for (const auto& row : table.rows) {
        const PersonCategory category = person_category_from_string(row[cat]);
        const auto cell = static_cast<std::size_t>(parse_int(row[cid], "cell_id"));
        const std::size_t i = static_cast<std::size_t>(category) * n_cells + cell;
        const double value = parse_double(row[raw], "raw_aba");
        if (row[sc] == scenario_name) {
            raws[i] = value;
            have_raw[i] = 1;
        }
        if (row[sc] == reference_name) {
            refs[i] = value;
            have_ref[i] = 1;
        }
    }
    if (self_reference)
        refs = raws;

    const CsvTable scaling = read_csv(scaling_path);
    const std::size_t s_cat = scaling.column("category"), s_cid = scaling.column("cell_id"),
                      s_val = scaling.column("value");
    std::vector<double> scales(3 * n_cells, 0.0);
    std::vector<char> have_scale(3 * n_cells, 0);
    for (const auto& row : scaling.rows) {
        const PersonCategory category = person_category_from_string(row[s_cat]);
        const auto cell = static_cast<std::size_t>(parse_int(row[s_cid], "cell_id"));
        const std::size_t i = static_cast<std::size_t>(category) * n_cells + cell;
        scales[i] = parse_double(row[s_val], "scaling value");
        have_scale[i] = 1;
    }

    for (PersonCategory category : kPersonCategories)
        for (std::size_t cell = 0; cell < n_cells; ++cell) {
            const std::size_t i = static_cast<std::size_t>(category) * n_cells + cell;
            if (!have_raw[i] || !(self_reference || have_ref[i]) || !have_scale[i])
                throw DataError("surface import: missing entry for category " +
                                std::string(to_string(category)) + ", cell " +
                                std::to_string(cell));
            surface.set(category, cell, raws[i], refs[i], scales[i]);
        }
    return surface;
}

} // namespace relosim
