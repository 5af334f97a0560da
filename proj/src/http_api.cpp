#include "fbac/http_api.hpp"

#include <httplib.h>

#include <charconv>
#include <mutex>
#include <random>

namespace fbac {

using nlohmann::json;

InvokeRequest invoke_request_from_json(const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::InvalidOption, "request body must be a JSON object");
    InvokeRequest r;
    try {
        r.function = body.at("function").get<std::string>();
        if (body.contains("args"))
            for (const auto& a : body.at("args")) r.args.push_back(a.get<std::string>());
        if (body.contains("stdin")) r.stdin_bytes = body.at("stdin").get<std::string>();
        if (body.contains("options")) {
            const auto& opts = body.at("options");
            auto value_of = [](const json& v) -> std::optional<std::string> {
                if (v.is_null()) return std::nullopt;
                if (v.is_string()) return v.get<std::string>();
                if (v.is_boolean()) return v.get<bool>() ? std::optional<std::string>{} : std::optional<std::string>{"false"};
                return v.dump();
            };
            if (opts.is_object()) {
                for (const auto& [k, v] : opts.items()) r.options.push_back(Option{k, value_of(v)});
            } else {
                for (const auto& o : opts)
                    r.options.push_back(Option{o.at("key").get<std::string>(),
                                               o.contains("value") ? value_of(o.at("value")) : std::nullopt});
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidOption, std::string("bad invoke body: ") + e.what());
    }
    return r;
}

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::Unauthenticated: return 401;
    case ErrorCode::Forbidden:
    case ErrorCode::AccessDenied: return 403;
    case ErrorCode::UnknownDocument:
    case ErrorCode::UnknownAtom:
    case ErrorCode::UnknownFunction:
    case ErrorCode::UnknownSubject:
    case ErrorCode::UnknownObject: return 404;
    case ErrorCode::DuplicateComposite: return 409;
    default: return 400;
    }
}

struct ApiServer::Impl {
    Monitor& monitor;
    httplib::Server server;
    std::mutex sessions_mu;
    std::map<std::string, Principal> sessions;
    std::mt19937_64 rng{std::random_device{}()};

    explicit Impl(Monitor& m) : monitor(m) { routes(); }

    std::string new_session(const Principal& p) {
        std::lock_guard lock(sessions_mu);
        std::string id;
        do {
            char buf[33];
            std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                          static_cast<unsigned long long>(rng()));
            id = buf;
        } while (sessions.contains(id));
        sessions.emplace(id, p);
        return id;
    }

    Principal principal(const httplib::Request& req) {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view kBearer = "Bearer ";
        if (header.rfind(kBearer, 0) != 0) throw Error(ErrorCode::Unauthenticated, "missing session");
        std::lock_guard lock(sessions_mu);
        auto it = sessions.find(header.substr(kBearer.size()));
        if (it == sessions.end()) throw Error(ErrorCode::Unauthenticated, "unknown session");
        return it->second;
    }

    static void reply(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void refuse(httplib::Response& res) { reply(res, 403, {{"outcome", "Deny"}}); }

    static void answer(httplib::Response& res, const InvokeResponse& r) {
        if (r.outcome == Outcome::Allow) reply(res, 200, {{"outcome", "Allow"}, {"result", r.result}});
        else refuse(res);
    }

    // Runs a handler, mapping engine errors to status codes.
    template <typename F>
    static auto guard(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const Error& e) {
                reply(res, http_status(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
            } catch (const json::exception& e) {
                reply(res, 400, {{"error", "InvalidOption"}, {"message", e.what()}});
            }
        };
    }

    void routes() {
        server.Post("/session", guard([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = json::parse(req.body);
                        const auto p = monitor.authenticate(body.at("token").get<std::string>());
                        reply(res, 200,
                              {{"session", new_session(p)}, {"subject", p.subject.name}, {"role", to_string(p.role)}});
                    }));

        server.Get("/documents", guard([this](const httplib::Request& req, httplib::Response& res) {
                       principal(req);
                       reply(res, 200, {{"documents", monitor.document_ids()}});
                   }));

        server.Get(R"(/documents/([^/]+)/view)", guard([this](const httplib::Request& req, httplib::Response& res) {
                       const auto p = principal(req);
                       answer(res, monitor.invoke(p, InvokeRequest{std::string(fn::kRead), {req.matches[1]}, {}, {}}));
                   }));

        server.Get(R"(/documents/([^/]+)/atoms/([^/]+)/functions)",
                   guard([this](const httplib::Request& req, httplib::Response& res) {
                       const auto p = principal(req);
                       reply(res, 200, to_json(monitor.atom_functions(p, req.matches[1].str(), req.matches[2].str())));
                   }));

        server.Post("/invoke", guard([this](const httplib::Request& req, httplib::Response& res) {
                        const auto p = principal(req);
                        answer(res, monitor.invoke(p, invoke_request_from_json(json::parse(req.body))));
                    }));

        server.Get(R"(/projections/([a-z]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
                       const auto p = principal(req);
                       std::map<std::string, std::string> params;
                       for (const auto& [k, v] : req.params) params[k] = v;
                       reply(res, 200, monitor.projection(p, req.matches[1].str(), params));
                   }));

        server.Get("/audit", guard([this](const httplib::Request& req, httplib::Response& res) {
                       const auto p = principal(req);
                       AuditFilter f;
                       auto time = [&](const char* key) -> std::optional<std::int64_t> {
                           if (!req.has_param(key)) return std::nullopt;
                           const auto v = req.get_param_value(key);
                           std::int64_t n = 0;
                           auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
                           if (ec != std::errc{} || ptr != v.data() + v.size())
                               throw Error(ErrorCode::InvalidOption, std::string(key) + " must be an integer");
                           return n;
                       };
                       if (req.has_param("subject")) f.subject = SubjectId{req.get_param_value("subject")};
                       if (req.has_param("function")) f.function = req.get_param_value("function");
                       if (req.has_param("object")) f.object = ObjectRef{req.get_param_value("object")};
                       if (req.has_param("outcome")) {
                           const auto o = req.get_param_value("outcome");
                           if (o == "Allow") f.outcome = Outcome::Allow;
                           else if (o == "Deny") f.outcome = Outcome::Deny;
                           else throw Error(ErrorCode::InvalidOption, "outcome must be Allow or Deny");
                       }
                       f.from_ms = time("from");
                       f.to_ms = time("to");
                       if (p.role != Role::Admin) {
                           if (f.subject && *f.subject != p.subject)
                               throw Error(ErrorCode::Forbidden, "only admins may read other subjects' records");
                           f.subject = p.subject;
                       }
                       json records = json::array();
                       for (const auto& r : monitor.audit_query(f)) records.push_back(to_json(r));
                       reply(res, 200, {{"records", records}});
                   }));
    }
};

ApiServer::ApiServer(Monitor& monitor) : impl_(std::make_unique<Impl>(monitor)) {}
ApiServer::~ApiServer() { stop(); }

int ApiServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool ApiServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void ApiServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}
void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fbac
