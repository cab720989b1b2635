#include "nostill/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nostill/numeric_text.hpp"

namespace nostill {

namespace {

using boost::property_tree::ptree;

std::string join(const std::vector<double> &values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) { out += ' '; }
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> to_vector(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

std::string checksum_hex(std::uint32_t crc) {
    char buf[9];
    std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(crc));
    return buf;
}

void put_header(ptree &tree, const char *kind, const Dataset &train) {
    tree.put("model.format", "nostill-model");
    tree.put("model.version", std::to_string(kModelFormatVersion));
    tree.put("model.kind", kind);
    tree.put("data.rows", std::to_string(train.size()));
    tree.put("data.checksum", checksum_hex(train.checksum()));
    if (const auto &norm = train.normalization()) {
        tree.put("data.norm_mean", format_double(norm->mean));
        tree.put("data.norm_stddev", format_double(norm->stddev));
    }
}

void put_kernel(ptree &tree, const std::string &section, const KernelSpec &spec) {
    tree.put(section + ".family", to_string(spec.family));
    tree.put(section + ".sigma_f", format_double(spec.sigma_f));
    tree.put(section + ".spatial_dim_p", std::to_string(spec.spatial_dim_p));
    tree.put(section + ".ch2_overall_variance", spec.ch2_overall_variance ? "true" : "false");
    tree.put(section + ".length_scales", join(spec.length_scales));
}

void write_tree(const ptree &tree, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) { throw IoError("cannot write model file " + path.string()); }
    boost::property_tree::write_ini(out, tree);
    if (!out) { throw IoError("write failed for model file " + path.string()); }
}

class Reader {
public:
    Reader(const ptree &tree, std::filesystem::path path) : tree_(tree), path_(std::move(path)) {}

    [[nodiscard]] std::string text(const std::string &key) const {
        const auto v = tree_.get_optional<std::string>(key);
        if (!v) { fail("missing key '" + key + "'"); }
        return *v;
    }
    [[nodiscard]] double real(const std::string &key) const {
        const auto v = parse_double(text(key));
        if (!v) { fail("key '" + key + "' is not a number"); }
        return *v;
    }
    [[nodiscard]] long integer(const std::string &key) const {
        const auto v = parse_long(text(key));
        if (!v) { fail("key '" + key + "' is not an integer"); }
        return *v;
    }
    [[nodiscard]] bool flag(const std::string &key) const {
        const auto t = text(key);
        if (t == "true") { return true; }
        if (t == "false") { return false; }
        fail("key '" + key + "' must be true or false");
    }
    [[nodiscard]] std::vector<double> reals(const std::string &key) const {
        std::vector<double> out;
        std::istringstream in(text(key));
        std::string token;
        while (in >> token) {
            const auto v = parse_double(token);
            if (!v) { fail("key '" + key + "' holds a non-number"); }
            out.push_back(*v);
        }
        return out;
    }
    [[nodiscard]] KernelSpec kernel(const std::string &section, bool with_scales = true) const {
        KernelSpec spec;
        try {
            spec.family = kernel_family_from_string(text(section + ".family"));
        } catch (const ConfigError &e) {
            fail(e.what());
        }
        spec.sigma_f = real(section + ".sigma_f");
        spec.spatial_dim_p = static_cast<int>(integer(section + ".spatial_dim_p"));
        spec.ch2_overall_variance = flag(section + ".ch2_overall_variance");
        if (with_scales) { spec.length_scales = reals(section + ".length_scales"); }
        return spec;
    }
    [[noreturn]] void fail(const std::string &what) const {
        throw DataError("model file " + path_.string() + ": " + what);
    }

private:
    const ptree &tree_;
    std::filesystem::path path_;
};

}  // namespace

void save_model(const StationaryModel &model, const std::filesystem::path &path) {
    ptree tree;
    put_header(tree, "stationary", model.train_data());
    put_kernel(tree, "kernel", model.params().kernel);
    tree.put("kernel.noise_var", format_double(model.params().noise_var));
    write_tree(tree, path);
}

void save_model(const NostillModel &model, const std::filesystem::path &path) {
    const auto &p = model.params();
    ptree tree;
    put_header(tree, "nostill", model.train_data());
    tree.put("kernel.family", to_string(p.base_family));
    tree.put("kernel.sigma_f", format_double(p.sigma_f));
    tree.put("kernel.spatial_dim_p", std::to_string(p.spatial_dim_p));
    tree.put("kernel.ch2_overall_variance", p.ch2_overall_variance ? "true" : "false");
    tree.put("kernel.sparse", p.sparse ? "true" : "false");
    tree.put("kernel.noise_var", format_double(p.noise_var));

    std::vector<double> xs, ys, ts;
    for (const auto &q : p.latent_points) {
        xs.push_back(q.x);
        ys.push_back(q.y);
        ts.push_back(q.t);
    }
    tree.put("latent.count", std::to_string(p.latent_count()));
    tree.put("latent.x", join(xs));
    tree.put("latent.y", join(ys));
    tree.put("latent.t", join(ts));
    tree.put("latent.log_lbar_x", join(to_vector(p.log_lbar_x)));
    tree.put("latent.log_lbar_y", join(to_vector(p.log_lbar_y)));
    tree.put("latent.log_lbar_t", join(to_vector(p.log_lbar_t)));
    tree.put("latent.noise_var", format_double(p.latent_noise_var));
    put_kernel(tree, "latent_kernel_x", p.theta_lx);
    put_kernel(tree, "latent_kernel_y", p.theta_ly);
    put_kernel(tree, "latent_kernel_t", p.theta_lt);
    write_tree(tree, path);
}

SavedModel load_model(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) { throw IoError("cannot read model file " + path.string()); }
    ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw DataError("model file " + path.string() + ": " + e.message());
    }
    const Reader r(tree, path);
    if (r.text("model.format") != "nostill-model") { r.fail("not a model file"); }
    if (r.integer("model.version") != kModelFormatVersion) {
        r.fail("unsupported format version " + r.text("model.version"));
    }

    SavedModel saved;
    const long rows = r.integer("data.rows");
    if (rows < 1) { r.fail("data.rows must be positive"); }
    saved.train_rows = static_cast<std::size_t>(rows);
    const auto crc = r.text("data.checksum");
    try {
        std::size_t used = 0;
        saved.train_checksum = static_cast<std::uint32_t>(std::stoul(crc, &used, 16));
        if (used != crc.size() || crc.size() != 8) { r.fail("bad data.checksum"); }
    } catch (const std::logic_error &) {
        r.fail("bad data.checksum");
    }
    if (tree.get_optional<std::string>("data.norm_mean")) {
        saved.normalization = Normalization{r.real("data.norm_mean"), r.real("data.norm_stddev")};
    }

    const auto kind = r.text("model.kind");
    if (kind == "stationary") {
        StationaryParams p;
        p.kernel = r.kernel("kernel");
        p.noise_var = r.real("kernel.noise_var");
        if (p.kernel.length_scales.size() != 3) { r.fail("stationary kernel needs 3 length scales"); }
        saved.stationary = p;
    } else if (kind == "nostill") {
        NostillParams p;
        const auto base = r.kernel("kernel", false);
        p.base_family = base.family;
        p.sigma_f = base.sigma_f;
        p.spatial_dim_p = base.spatial_dim_p;
        p.ch2_overall_variance = base.ch2_overall_variance;
        p.sparse = r.flag("kernel.sparse");
        p.noise_var = r.real("kernel.noise_var");
        const auto m = static_cast<std::size_t>(r.integer("latent.count"));
        const auto xs = r.reals("latent.x");
        const auto ys = r.reals("latent.y");
        const auto ts = r.reals("latent.t");
        const auto lx = r.reals("latent.log_lbar_x");
        const auto ly = r.reals("latent.log_lbar_y");
        const auto lt = r.reals("latent.log_lbar_t");
        for (const auto *v : {&xs, &ys, &ts, &lx, &ly, &lt}) {
            if (v->size() != m) { r.fail("latent vectors must hold latent.count entries"); }
        }
        for (std::size_t i = 0; i < m; ++i) { p.latent_points.push_back({xs[i], ys[i], ts[i]}); }
        p.log_lbar_x = Eigen::Map<const Eigen::VectorXd>(lx.data(), static_cast<Eigen::Index>(m));
        p.log_lbar_y = Eigen::Map<const Eigen::VectorXd>(ly.data(), static_cast<Eigen::Index>(m));
        p.log_lbar_t = Eigen::Map<const Eigen::VectorXd>(lt.data(), static_cast<Eigen::Index>(m));
        p.latent_noise_var = r.real("latent.noise_var");
        p.theta_lx = r.kernel("latent_kernel_x");
        p.theta_ly = r.kernel("latent_kernel_y");
        p.theta_lt = r.kernel("latent_kernel_t");
        try {
            p.validate();
        } catch (const std::domain_error &e) {
            r.fail(e.what());
        }
        saved.nostill = p;
    } else {
        r.fail("unknown model kind '" + kind + "'");
    }
    return saved;
}

std::unique_ptr<SpaceTimeModel> rebuild_model(const SavedModel &saved, const Dataset &train) {
    if (train.size() != saved.train_rows || train.checksum() != saved.train_checksum) {
        throw DataError("training data fingerprint does not match the model file (expected " +
                        std::to_string(saved.train_rows) + " rows, checksum " + checksum_hex(saved.train_checksum) +
                        "; got " + std::to_string(train.size()) + " rows, checksum " +
                        checksum_hex(train.checksum()) + ")");
    }
    if (saved.stationary) { return std::make_unique<StationaryModel>(*saved.stationary, train); }
    if (saved.nostill) { return std::make_unique<NostillModel>(*saved.nostill, train); }
    throw DataError("model file holds no parameters");
}

}  // namespace nostill
