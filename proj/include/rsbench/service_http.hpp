#pragma once

// HTTP endpoints for AnnotationService. Request and response bodies are
// JSON objects, one per line.
//
//   GET  /api/tasks                        task summaries
//   GET  /api/tasks/{id}/next?rater_id=    next item or {"status":"exhausted"}
//   POST /api/ratings[?task_id=]           RatingRecord lines -> status lines
//   POST /api/judgments[?task_id=]         Judgment lines -> status lines
//   GET  /api/progress?task_id=            per-rater done counts
//   GET  /api/export?task_id=              submitted records
//   GET  /api/images/{image_id}            raster bytes
//   GET  /api/rubric                       grading criteria

#include <string>

#include "httplib.h"
#include "rsbench/image_io.hpp"
#include "rsbench/service.hpp"

namespace rsbench::service {

namespace http_detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/x-ndjson");
}

inline void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, Json{{"error", msg}});
}

// Runs the handler, mapping library exceptions to HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    send_error(res, 404, e.what());
  } catch (const DataError& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

inline std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw DataError(std::string("missing query parameter \"") + name + "\"");
  return req.get_param_value(name);
}

// Submission lines paired with their task id (query parameter or a
// "task_id" field on the line).
template <typename Fn>
void for_each_submission(const httplib::Request& req, Fn&& fn) {
  std::string query_task = req.has_param("task_id") ? req.get_param_value("task_id") : std::string();
  rsbench::detail::for_each_jsonl(req.body, "<request>", [&](const Json& obj, const rsbench::detail::LineContext& ctx) {
    std::string task_id = obj.contains("task_id") ? rsbench::detail::require_string(obj, "task_id", ctx) : query_task;
    if (task_id.empty()) rsbench::detail::fail(ctx, "missing task_id");
    fn(task_id, obj, ctx);
  });
}

}  // namespace http_detail

/// Registers every endpoint of `svc` on `server`.
inline void bind_routes(httplib::Server& server, AnnotationService& svc) {
  using namespace http_detail;

  server.Get("/api/tasks", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::string body;
      for (const auto& t : svc.tasks())
        body += Json{{"task_id", t.task_id}, {"kind", to_string(t.kind)}, {"total", t.items.size()}}.dump() + "\n";
      res.set_content(body, "application/x-ndjson");
    });
  });

  server.Get(R"(/api/tasks/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string task_id = req.matches[1];
      auto next = svc.next_item(task_id, required_param(req, "rater_id"));
      if (next.exhausted()) {
        send_json(res, 200, Json{{"status", "exhausted"}, {"task_id", task_id}});
        return;
      }
      Json body{{"status", "item"}, {"task_id", task_id}, {"index", *next.index}};
      Json item = to_json(*next.item);
      for (const auto& [k, v] : item.items()) body[k] = v;
      send_json(res, 200, body);
    });
  });

  server.Post("/api/ratings", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string body;
      for_each_submission(req, [&](const std::string& task_id, const Json& obj, const rsbench::detail::LineContext& ctx) {
        auto r = rating::rating_from_json(obj, ctx);
        auto status = svc.submit_rating(task_id, r);
        body += Json{{"status", rating::to_string(status)}, {"rating_id", r.rating_id}}.dump() + "\n";
      });
      if (body.empty()) throw DataError("empty request body");
      res.set_content(body, "application/x-ndjson");
    });
  });

  server.Post("/api/judgments", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string body;
      for_each_submission(req, [&](const std::string& task_id, const Json& obj, const rsbench::detail::LineContext& ctx) {
        auto j = vqa::judgment_from_json(obj, ctx);
        auto status = svc.submit_judgment(task_id, j);
        body += Json{{"status", rating::to_string(status)}, {"judgment_id", j.judgment_id}}.dump() + "\n";
      });
      if (body.empty()) throw DataError("empty request body");
      res.set_content(body, "application/x-ndjson");
    });
  });

  server.Get("/api/progress", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string task_id = required_param(req, "task_id");
      auto p = svc.progress(task_id);
      Json raters = Json::object();
      for (const auto& [r, n] : p.done_by_rater) raters[r] = n;
      send_json(res, 200, Json{{"task_id", task_id}, {"total", p.total}, {"done", raters}});
    });
  });

  server.Get("/api/export", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(svc.export_task(required_param(req, "task_id")), "application/x-ndjson"); });
  });

  server.Get(R"(/api/images/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto path = svc.image_path(req.matches[1]);
      if (!std::filesystem::exists(path)) throw NotFound("image file missing: " + path.string());
      res.set_content(rsbench::detail::read_file(path.string()), std::string(image_io::content_type_for(path)));
    });
  });

  server.Get("/api/rubric", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.rubric()); });
  });
}

}  // namespace rsbench::service
