from datetime import date

import pytest

from wheatyield.domain import SoilRecord
from wheatyield.ingest import (
    SchemaError,
    carry_forward_soil,
    parse_crop,
    parse_soil,
    parse_weather,
)

SOIL_HEADER = "zone_id,test_year,p_mg_l,k_mg_l,mg_mg_l,ph,soil_type,stone_content,organic_matter,caco3"
WEATHER_HEADER = "zone_id,date,t_min_c,t_max_c,precip_mm,solar_mj_m2,humidity_pct"
CROP_HEADER = "zone_id,year,crop,sowing_date,harvest_date,yield_t_ha"


def write(tmp_path, name, header, rows):
    path = tmp_path / name
    path.write_text("\n".join([header] + rows) + "\n")
    return path


class TestParseSoil:
    def test_well_formed_row(self, tmp_path):
        path = write(tmp_path, "soil.csv", SOIL_HEADER,
                     ["Z1,2015,25.0,180.0,60.0,6.8,medium,low,moderate,calc"])
        records, log = parse_soil(path)
        assert len(records) == 1 and len(log) == 0
        rec = records[0]
        assert rec.zone_id == "Z1" and rec.test_year == 2015
        assert rec.p == 25.0 and rec.ph == 6.8
        assert rec.caco3 == "calc"

    def test_unknown_category_logged(self, tmp_path):
        path = write(tmp_path, "soil.csv", SOIL_HEADER,
                     ["Z1,2015,25.0,180.0,60.0,6.8,granite,low,moderate,calc"])
        records, log = parse_soil(path)
        assert records == []
        assert len(log) == 1
        entry = log.entries[0]
        assert entry.line == 2 and "granite" in entry.reason

    def test_header_only(self, tmp_path):
        path = write(tmp_path, "soil.csv", SOIL_HEADER, [])
        records, log = parse_soil(path)
        assert records == [] and len(log) == 0

    def test_missing_file_fatal(self, tmp_path):
        with pytest.raises(SchemaError):
            parse_soil(tmp_path / "nope.csv")

    def test_wrong_header_fatal(self, tmp_path):
        path = write(tmp_path, "soil.csv", "zone,year", ["Z1,2015"])
        with pytest.raises(SchemaError):
            parse_soil(path)

    def test_duplicate_zone_year_keeps_first(self, tmp_path):
        path = write(tmp_path, "soil.csv", SOIL_HEADER, [
            "Z1,2015,25.0,180.0,60.0,6.8,medium,low,moderate,calc",
            "Z1,2015,30.0,190.0,70.0,7.0,medium,low,moderate,calc",
        ])
        records, log = parse_soil(path)
        assert len(records) == 1 and records[0].p == 25.0
        assert len(log) == 1 and "duplicate" in log.entries[0].reason

    def test_unparseable_value_logged(self, tmp_path):
        path = write(tmp_path, "soil.csv", SOIL_HEADER,
                     ["Z1,2015,abc,180.0,60.0,6.8,medium,low,moderate,calc"])
        records, log = parse_soil(path)
        assert records == [] and len(log) == 1

    def test_row_count_invariant(self, tmp_path):
        rows = [
            "Z1,2015,25.0,180.0,60.0,6.8,medium,low,moderate,calc",
            "Z2,2015,-1,180.0,60.0,6.8,medium,low,moderate,calc",
            "Z3,2015,25.0,180.0,60.0,20.0,medium,low,moderate,calc",
            "Z1,2015,11.0,180.0,60.0,6.8,medium,low,moderate,calc",
        ]
        path = write(tmp_path, "soil.csv", SOIL_HEADER, rows)
        records, log = parse_soil(path)
        assert len(records) + len(log) == len(rows)

    def test_determinism(self, tmp_path):
        rows = ["Z1,2015,25.0,180.0,60.0,6.8,medium,low,moderate,calc",
                "Z2,2016,11.0,120.0,40.0,7.2,shallow,gravel,low,slightly calc"]
        path = write(tmp_path, "soil.csv", SOIL_HEADER, rows)
        assert parse_soil(path) == parse_soil(path)


class TestParseWeather:
    def test_well_formed_row(self, tmp_path):
        path = write(tmp_path, "weather.csv", WEATHER_HEADER,
                     ["Z1,2017-03-02,1.5,9.0,4.2,8.1,82.0"])
        records, log = parse_weather(path)
        assert len(records) == 1 and len(log) == 0
        rec = records[0]
        assert rec.date == date(2017, 3, 2)
        assert rec.t_min == 1.5 and rec.humidity == 82.0

    def test_tmin_above_tmax_rejected(self, tmp_path):
        path = write(tmp_path, "weather.csv", WEATHER_HEADER,
                     ["Z1,2017-03-02,12.0,8.0,4.2,8.1,82.0"])
        records, log = parse_weather(path)
        assert records == [] and len(log) == 1

    def test_duplicate_zone_date_second_rejected(self, tmp_path):
        path = write(tmp_path, "weather.csv", WEATHER_HEADER, [
            "Z1,2017-03-02,1.5,9.0,4.2,8.1,82.0",
            "Z1,2017-03-02,2.0,10.0,0.0,9.0,70.0",
        ])
        records, log = parse_weather(path)
        assert len(records) == 1 and records[0].t_min == 1.5
        assert "duplicate" in log.entries[0].reason

    def test_bad_date_logged(self, tmp_path):
        path = write(tmp_path, "weather.csv", WEATHER_HEADER,
                     ["Z1,02/03/2017,1.5,9.0,4.2,8.1,82.0"])
        records, log = parse_weather(path)
        assert records == [] and len(log) == 1


class TestParseCrop:
    def test_winter_wheat_kept(self, tmp_path):
        path = write(tmp_path, "crop.csv", CROP_HEADER,
                     ["Z1,2014,winter_wheat,2013-10-01,2014-08-01,10.78"])
        records, log = parse_crop(path)
        assert len(records) == 1 and records[0].yield_t_ha == 10.78

    def test_other_crop_filtered_distinctly(self, tmp_path):
        path = write(tmp_path, "crop.csv", CROP_HEADER,
                     ["Z1,2014,spring_barley,2014-03-01,2014-09-01,6.5"])
        records, log = parse_crop(path)
        assert records == []
        assert len(log) == 1 and log.entries[0].reason.startswith("filtered")

    def test_crop_filter_case_insensitive(self, tmp_path):
        path = write(tmp_path, "crop.csv", CROP_HEADER,
                     ["Z1,2014,Winter_Wheat,2013-10-01,2014-08-01,10.78"])
        records, _ = parse_crop(path)
        assert len(records) == 1

    def test_duplicate_zone_year_keeps_first(self, tmp_path):
        path = write(tmp_path, "crop.csv", CROP_HEADER, [
            "Z1,2014,winter_wheat,2013-10-01,2014-08-01,10.78",
            "Z1,2014,winter_wheat,2013-10-01,2014-08-01,8.00",
        ])
        records, log = parse_crop(path)
        assert len(records) == 1 and records[0].yield_t_ha == 10.78
        assert "duplicate" in log.entries[0].reason

    def test_implausible_yield_rejected(self, tmp_path):
        path = write(tmp_path, "crop.csv", CROP_HEADER,
                     ["Z1,2014,winter_wheat,2013-10-01,2014-08-01,55.0"])
        records, log = parse_crop(path)
        assert records == [] and len(log) == 1


def soil_test(zone, year) -> SoilRecord:
    return SoilRecord(zone, year, 25.0, 180.0, 60.0, 6.8,
                      "medium", "low", "moderate", "calc")


class TestCarryForward:
    def test_most_recent_past_test(self):
        records = [soil_test("Z1", 2013), soil_test("Z1", 2016)]
        got = carry_forward_soil(records, "Z1", 2018)
        assert got is not None and got.test_year == 2016

    def test_same_year_test_used(self):
        records = [soil_test("Z1", 2015)]
        got = carry_forward_soil(records, "Z1", 2015)
        assert got is not None and got.test_year == 2015

    def test_only_future_test_gives_none(self):
        records = [soil_test("Z1", 2019)]
        assert carry_forward_soil(records, "Z1", 2018) is None

    def test_other_zone_ignored(self):
        records = [soil_test("Z2", 2015)]
        assert carry_forward_soil(records, "Z1", 2018) is None

    def test_never_returns_future_year(self):
        records = [soil_test("Z1", y) for y in (2012, 2014, 2017, 2019)]
        for query in range(2012, 2021):
            got = carry_forward_soil(records, "Z1", query)
            if got is not None:
                assert got.test_year <= query


def test_cleaned_output_round_trips_losslessly(tmp_path):
    from wheatyield.ingest import write_weather_csv

    path = write(tmp_path, "weather.csv", WEATHER_HEADER,
                 ["Z1,2017-03-02,1.53917,9.00001,4.2,8.1,82.0"])
    records, _ = parse_weather(path)
    out = tmp_path / "clean.csv"
    write_weather_csv(records, out)
    reparsed, log = parse_weather(out)
    assert len(log) == 0
    assert reparsed == records


def test_rejection_log_csv_schema(tmp_path):
    path = write(tmp_path, "crop.csv", CROP_HEADER,
                 ["Z1,2014,spring_barley,2014-03-01,2014-09-01,6.5"])
    _, log = parse_crop(path)
    out = tmp_path / "rejections.csv"
    log.write_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "source,line,reason"
    assert lines[1].startswith(str(path)) and ",2," in lines[1]
