//! Small bundled frequency tables used by the generator and the anonymizer.
//!
//! Counts are rounded and only need to carry a realistic skew; they are not
//! census data.

pub const SURNAMES: &[(&str, u64)] = &[
    ("SMITH", 2442), ("JOHNSON", 1932), ("WILLIAMS", 1625), ("BROWN", 1437), ("JONES", 1425),
    ("GARCIA", 1166), ("MILLER", 1161), ("DAVIS", 1116), ("RODRIGUEZ", 1094), ("MARTINEZ", 1060),
    ("HERNANDEZ", 1043), ("LOPEZ", 874), ("GONZALEZ", 841), ("WILSON", 801), ("ANDERSON", 784),
    ("THOMAS", 756), ("TAYLOR", 751), ("MOORE", 724), ("JACKSON", 708), ("MARTIN", 702),
    ("LEE", 693), ("PEREZ", 681), ("THOMPSON", 664), ("WHITE", 660), ("HARRIS", 624),
    ("SANCHEZ", 612), ("CLARK", 562), ("RAMIREZ", 557), ("LEWIS", 531), ("ROBINSON", 529),
    ("WALKER", 523), ("YOUNG", 484), ("ALLEN", 482), ("KING", 465), ("WRIGHT", 458),
    ("SCOTT", 439), ("TORRES", 437), ("NGUYEN", 437), ("HILL", 434), ("FLORES", 433),
    ("GREEN", 430), ("ADAMS", 427), ("NELSON", 424), ("BAKER", 419), ("HALL", 407),
    ("RIVERA", 397), ("CAMPBELL", 395), ("MITCHELL", 392), ("CARTER", 376), ("ROBERTS", 376),
    ("GOMEZ", 365), ("PHILLIPS", 351), ("EVANS", 342), ("TURNER", 335), ("DIAZ", 332),
    ("PARKER", 329), ("CRUZ", 327), ("EDWARDS", 325), ("COLLINS", 317), ("REYES", 317),
    ("STEWART", 312), ("MORRIS", 299), ("MORALES", 293), ("MURPHY", 292), ("COOK", 290),
    ("ROGERS", 288), ("GUTIERREZ", 271), ("ORTIZ", 270), ("MORGAN", 269), ("COOPER", 267),
    ("PETERSON", 266), ("BAILEY", 265), ("REED", 264), ("KELLY", 260), ("HOWARD", 254),
    ("RAMOS", 249), ("KIM", 249), ("COX", 249), ("WARD", 245), ("RICHARDSON", 242),
    ("WATSON", 241), ("BROOKS", 240), ("CHAVEZ", 239), ("WOOD", 238), ("JAMES", 237),
    ("BENNETT", 232), ("GRAY", 231), ("MENDOZA", 230), ("RUIZ", 229), ("HUGHES", 229),
    ("PRICE", 228), ("ALVAREZ", 227), ("CASTILLO", 225), ("SANDERS", 224), ("PATEL", 223),
    ("MYERS", 222), ("LONG", 221), ("ROSS", 221), ("FOSTER", 217), ("JIMENEZ", 214),
    ("POWELL", 214), ("JENKINS", 210), ("PERRY", 210), ("RUSSELL", 209), ("SULLIVAN", 208),
    ("BELL", 206), ("COLEMAN", 206), ("BUTLER", 205), ("HENDERSON", 205), ("BARNES", 205),
    ("GONZALES", 204), ("FISHER", 198), ("VASQUEZ", 197), ("SIMMONS", 196), ("ROMERO", 195),
    ("JORDAN", 195), ("PATTERSON", 194), ("ALEXANDER", 192), ("HAMILTON", 192), ("GRAHAM", 191),
    ("REYNOLDS", 189), ("GRIFFIN", 188), ("WALLACE", 188), ("MORENO", 187), ("WEST", 186),
    ("COLE", 185), ("HAYES", 185), ("BRYANT", 184), ("HERRERA", 183), ("GIBSON", 181),
    ("ELLIS", 180), ("TRAN", 180), ("MEDINA", 179), ("AGUILAR", 178), ("STEVENS", 177),
    ("MURRAY", 176), ("FORD", 175), ("CASTRO", 174), ("MARSHALL", 174), ("OWENS", 173),
    ("HARRISON", 172), ("FERNANDEZ", 171), ("MCDONALD", 170), ("WOODS", 169), ("WASHINGTON", 168),
    ("KENNEDY", 167), ("WELLS", 166), ("VARGAS", 166), ("HENRY", 165), ("CHEN", 165),
    ("FREEMAN", 164), ("WEBB", 164), ("TUCKER", 163), ("GUZMAN", 163), ("BURNS", 162),
    ("CRAWFORD", 162), ("OLSON", 161), ("SIMPSON", 161), ("PORTER", 160), ("HUNTER", 160),
    ("GORDON", 159), ("MENDEZ", 158), ("SILVA", 158), ("SHAW", 157), ("SNYDER", 157),
    ("MASON", 156), ("DIXON", 156), ("MUNOZ", 155), ("HUNT", 155), ("HICKS", 154),
    ("HOLMES", 153), ("PALMER", 152), ("WAGNER", 152), ("BLACK", 151), ("ROBERTSON", 150),
    ("BOYD", 150), ("ROSE", 149), ("STONE", 148), ("SALAZAR", 148), ("FOX", 147),
    ("WARREN", 147), ("MILLS", 146), ("MEYER", 145), ("RICE", 145), ("SCHMIDT", 144),
    ("GARZA", 144), ("DANIELS", 143), ("FERGUSON", 143), ("NICHOLS", 142), ("STEPHENS", 142),
    ("SOTO", 141), ("WEAVER", 140), ("RYAN", 140), ("GARDNER", 139), ("PAYNE", 139),
    ("GRANT", 138), ("DUNN", 138), ("KELLEY", 137), ("SPENCER", 137), ("HAWKINS", 136),
    ("ARNOLD", 136), ("PIERCE", 135), ("VAZQUEZ", 135), ("HANSEN", 134), ("PETERS", 134),
    ("SANTOS", 133), ("HART", 133), ("BRADLEY", 132), ("KNIGHT", 132), ("ELLIOTT", 131),
    ("CUNNINGHAM", 131), ("DUNCAN", 130), ("ARMSTRONG", 130), ("HUDSON", 129), ("CARROLL", 129),
    ("LANE", 128), ("RILEY", 128), ("ANDREWS", 127), ("ALVARADO", 127), ("RAY", 126),
    ("DELGADO", 126), ("BERRY", 125), ("PERKINS", 125), ("HOFFMAN", 124), ("JOHNSTON", 124),
    ("MATTHEWS", 123), ("PENA", 123), ("RICHARDS", 122), ("CONTRERAS", 122), ("WILLIS", 121),
    ("CARPENTER", 121), ("LAWRENCE", 120), ("SANDOVAL", 120), ("GUERRERO", 119), ("GEORGE", 119),
    ("CHAPMAN", 118), ("RIOS", 118), ("ESTRADA", 117), ("ORTEGA", 117), ("WATKINS", 116),
    ("GREENE", 116), ("NUNEZ", 115), ("WHEELER", 115), ("VALDEZ", 114), ("HARPER", 114),
    ("OBRIEN", 113), ("LYNCH", 112), ("BARKER", 111), ("ODONNELL", 110), ("NAKAMURA", 109),
];

pub const GIVEN_FEMALE: &[(&str, u64)] = &[
    ("MARY", 2629), ("PATRICIA", 1073), ("LINDA", 1035), ("BARBARA", 980), ("ELIZABETH", 937),
    ("JENNIFER", 932), ("MARIA", 828), ("SUSAN", 794), ("MARGARET", 768), ("DOROTHY", 727),
    ("LISA", 704), ("NANCY", 669), ("KAREN", 667), ("BETTY", 666), ("HELEN", 663),
    ("SANDRA", 629), ("DONNA", 583), ("CAROL", 565), ("RUTH", 562), ("SHARON", 522),
    ("MICHELLE", 519), ("LAURA", 510), ("SARAH", 508), ("KIMBERLY", 504), ("DEBORAH", 494),
    ("JESSICA", 490), ("SHIRLEY", 482), ("CYNTHIA", 469), ("ANGELA", 468), ("MELISSA", 468),
    ("BRENDA", 455), ("AMY", 437), ("ANNA", 440), ("REBECCA", 430), ("VIRGINIA", 430),
    ("KATHLEEN", 424), ("PAMELA", 416), ("MARTHA", 412), ("DEBRA", 408), ("AMANDA", 404),
    ("STEPHANIE", 400), ("CAROLYN", 384), ("CHRISTINE", 382), ("MARIE", 379), ("JANET", 379),
    ("CATHERINE", 373), ("FRANCES", 370), ("ANN", 367), ("JOYCE", 364), ("DIANE", 359),
    ("ALICE", 357), ("JULIE", 348), ("HEATHER", 337), ("TERESA", 336), ("DORIS", 335),
    ("GLORIA", 335), ("EVELYN", 322), ("JEAN", 315), ("CHERYL", 315), ("MILDRED", 313),
    ("KATHERINE", 313), ("JOAN", 313), ("ASHLEY", 303), ("JUDITH", 297), ("ROSE", 296),
    ("JANICE", 285), ("KELLY", 282), ("NICOLE", 281), ("JUDY", 281), ("CHRISTINA", 280),
    ("KATHY", 272), ("THERESA", 270), ("BEVERLY", 269), ("DENISE", 264), ("TAMMY", 259),
    ("IRENE", 252), ("JANE", 250), ("LORI", 250), ("RACHEL", 249), ("MARILYN", 247),
    ("ANDREA", 246), ("KATHRYN", 244), ("LOUISE", 244), ("SARA", 241), ("ANNE", 241),
    ("JACQUELINE", 241), ("WANDA", 240), ("BONNIE", 239), ("JULIA", 239), ("RUBY", 238),
    ("VICTORIA", 220), ("ABIGAIL", 200), ("SUSANNAH", 120), ("ROSALIND", 90), ("PRISCILLA", 85),
];

pub const GIVEN_MALE: &[(&str, u64)] = &[
    ("JAMES", 3318), ("JOHN", 3271), ("ROBERT", 3143), ("MICHAEL", 2629), ("WILLIAM", 2451),
    ("DAVID", 2363), ("RICHARD", 1703), ("CHARLES", 1523), ("JOSEPH", 1404), ("THOMAS", 1380),
    ("CHRISTOPHER", 1035), ("DANIEL", 974), ("PAUL", 948), ("MARK", 938), ("DONALD", 931),
    ("GEORGE", 927), ("KENNETH", 826), ("STEVEN", 780), ("EDWARD", 779), ("BRIAN", 736),
    ("RONALD", 725), ("ANTHONY", 721), ("KEVIN", 671), ("JASON", 660), ("MATTHEW", 657),
    ("GARY", 650), ("TIMOTHY", 640), ("JOSE", 613), ("LARRY", 598), ("JEFFREY", 591),
    ("FRANK", 581), ("SCOTT", 546), ("ERIC", 544), ("STEPHEN", 540), ("ANDREW", 537),
    ("RAYMOND", 488), ("GREGORY", 441), ("JOSHUA", 435), ("JERRY", 432), ("DENNIS", 415),
    ("WALTER", 399), ("PATRICK", 389), ("PETER", 381), ("HAROLD", 371), ("DOUGLAS", 367),
    ("HENRY", 365), ("CARL", 346), ("ARTHUR", 335), ("RYAN", 328), ("ROGER", 322),
    ("JOE", 321), ("JUAN", 320), ("JACK", 315), ("ALBERT", 314), ("JONATHAN", 313),
    ("JUSTIN", 311), ("TERRY", 311), ("GERALD", 309), ("KEITH", 308), ("SAMUEL", 306),
    ("WILLIE", 302), ("RALPH", 282), ("LAWRENCE", 282), ("NICHOLAS", 275), ("ROY", 273),
    ("BENJAMIN", 270), ("BRUCE", 266), ("BRANDON", 264), ("ADAM", 259), ("HARRY", 251),
    ("FRED", 251), ("WAYNE", 249), ("BILLY", 248), ("STEVE", 246), ("LOUIS", 244),
    ("JEREMY", 242), ("AARON", 240), ("RANDY", 232), ("HOWARD", 230), ("EUGENE", 230),
    ("CARLOS", 229), ("RUSSELL", 224), ("BOBBY", 223), ("VICTOR", 222), ("MARTIN", 216),
    ("ERNEST", 215), ("PHILLIP", 214), ("TODD", 213), ("JESSE", 209), ("CRAIG", 206),
    ("ALAN", 206), ("SHAWN", 205), ("CLARENCE", 204), ("SEAN", 203), ("PHILIP", 203),
    ("ALEXANDER", 190), ("NATHANIEL", 150), ("THEODORE", 140), ("FREDERICK", 130), ("EMMANUEL", 80),
];

/// (nickname, canonical given name)
pub const NICKNAMES: &[(&str, &str)] = &[
    ("KATE", "CATHERINE"), ("CATHY", "CATHERINE"), ("KATIE", "KATHERINE"), ("KATHY", "KATHLEEN"),
    ("BETH", "ELIZABETH"), ("LIZ", "ELIZABETH"), ("BETSY", "ELIZABETH"), ("PEGGY", "MARGARET"),
    ("MAGGIE", "MARGARET"), ("PATTY", "PATRICIA"), ("TRISH", "PATRICIA"), ("JENNY", "JENNIFER"),
    ("JEN", "JENNIFER"), ("SUE", "SUSAN"), ("SUSIE", "SUSAN"), ("BARB", "BARBARA"),
    ("DOT", "DOROTHY"), ("DOTTIE", "DOROTHY"), ("SANDY", "SANDRA"), ("DEBBIE", "DEBORAH"),
    ("DEB", "DEBRA"), ("KIM", "KIMBERLY"), ("BECKY", "REBECCA"), ("PAM", "PAMELA"),
    ("MANDY", "AMANDA"), ("CHRIS", "CHRISTOPHER"), ("CHRISSY", "CHRISTINE"), ("FRAN", "FRANCES"),
    ("VICKY", "VICTORIA"), ("ABBY", "ABIGAIL"), ("JESS", "JESSICA"), ("STEPH", "STEPHANIE"),
    ("JIM", "JAMES"), ("JIMMY", "JAMES"), ("JACK", "JOHN"), ("JOHNNY", "JOHN"),
    ("BOB", "ROBERT"), ("BOBBY", "ROBERT"), ("ROB", "ROBERT"), ("MIKE", "MICHAEL"),
    ("MICKEY", "MICHAEL"), ("BILL", "WILLIAM"), ("WILL", "WILLIAM"), ("BILLY", "WILLIAM"),
    ("DAVE", "DAVID"), ("RICK", "RICHARD"), ("DICK", "RICHARD"), ("CHUCK", "CHARLES"),
    ("CHARLIE", "CHARLES"), ("JOE", "JOSEPH"), ("JOEY", "JOSEPH"), ("TOM", "THOMAS"),
    ("TOMMY", "THOMAS"), ("DAN", "DANIEL"), ("DANNY", "DANIEL"), ("DON", "DONALD"),
    ("KEN", "KENNETH"), ("KENNY", "KENNETH"), ("STEVE", "STEVEN"), ("ED", "EDWARD"),
    ("EDDIE", "EDWARD"), ("RON", "RONALD"), ("TONY", "ANTHONY"), ("MATT", "MATTHEW"),
    ("TIM", "TIMOTHY"), ("JEFF", "JEFFREY"), ("FRANKIE", "FRANK"), ("ANDY", "ANDREW"),
    ("DREW", "ANDREW"), ("RAY", "RAYMOND"), ("GREG", "GREGORY"), ("JOSH", "JOSHUA"),
    ("WALT", "WALTER"), ("PAT", "PATRICK"), ("PETE", "PETER"), ("HAL", "HAROLD"),
    ("DOUG", "DOUGLAS"), ("HANK", "HENRY"), ("ART", "ARTHUR"), ("JON", "JONATHAN"),
    ("SAM", "SAMUEL"), ("LARRY", "LAWRENCE"), ("NICK", "NICHOLAS"), ("BEN", "BENJAMIN"),
    ("ALEX", "ALEXANDER"), ("NATE", "NATHANIEL"), ("TED", "THEODORE"), ("FREDDY", "FREDERICK"),
    ("PHIL", "PHILLIP"), ("GENE", "EUGENE"), ("VIC", "VICTOR"), ("MANNY", "EMMANUEL"),
];

/// (city, state, zip prefix, weight)
pub const CITIES: &[(&str, &str, &str, u64)] = &[
    ("NEW YORK", "NY", "100", 8336), ("LOS ANGELES", "CA", "900", 3979), ("CHICAGO", "IL", "606", 2693),
    ("HOUSTON", "TX", "770", 2320), ("PHOENIX", "AZ", "850", 1680), ("PHILADELPHIA", "PA", "191", 1584),
    ("SAN ANTONIO", "TX", "782", 1547), ("SAN DIEGO", "CA", "921", 1423), ("DALLAS", "TX", "752", 1343),
    ("SAN JOSE", "CA", "951", 1021), ("AUSTIN", "TX", "787", 978), ("JACKSONVILLE", "FL", "322", 911),
    ("FORT WORTH", "TX", "761", 909), ("COLUMBUS", "OH", "432", 898), ("CHARLOTTE", "NC", "282", 885),
    ("SAN FRANCISCO", "CA", "941", 881), ("INDIANAPOLIS", "IN", "462", 876), ("SEATTLE", "WA", "981", 753),
    ("DENVER", "CO", "802", 727), ("WASHINGTON", "DC", "200", 705), ("BOSTON", "MA", "021", 692),
    ("EL PASO", "TX", "799", 681), ("NASHVILLE", "TN", "372", 670), ("DETROIT", "MI", "482", 670),
    ("OKLAHOMA CITY", "OK", "731", 655), ("PORTLAND", "OR", "972", 654), ("LAS VEGAS", "NV", "891", 651),
    ("MEMPHIS", "TN", "381", 651), ("LOUISVILLE", "KY", "402", 617), ("BALTIMORE", "MD", "212", 593),
    ("MILWAUKEE", "WI", "532", 590), ("ALBUQUERQUE", "NM", "871", 560), ("TUCSON", "AZ", "857", 548),
    ("FRESNO", "CA", "937", 531), ("SACRAMENTO", "CA", "958", 513), ("KANSAS CITY", "MO", "641", 495),
    ("ATLANTA", "GA", "303", 498), ("OMAHA", "NE", "681", 478), ("RALEIGH", "NC", "276", 474),
    ("MIAMI", "FL", "331", 467), ("MINNEAPOLIS", "MN", "554", 429), ("TULSA", "OK", "741", 401),
    ("CLEVELAND", "OH", "441", 381), ("WICHITA", "KS", "672", 389), ("ARLINGTON", "TX", "760", 398),
    ("SPRINGFIELD", "IL", "627", 116), ("SALEM", "OR", "973", 174), ("MADISON", "WI", "537", 259),
];

pub const STREET_NAMES: &[&str] = &[
    "MAIN", "OAK", "PINE", "MAPLE", "CEDAR", "ELM", "WASHINGTON", "LAKE", "HILL", "PARK",
    "WALNUT", "SPRING", "NORTH", "RIDGE", "CHURCH", "WILLOW", "MILL", "SUNSET", "RAILROAD", "JACKSON",
    "CHERRY", "HIGHLAND", "FOREST", "MEADOW", "RIVER", "LINCOLN", "JEFFERSON", "FRANKLIN", "CENTER", "MADISON",
    "ADAMS", "HICKORY", "DOGWOOD", "BIRCH", "LAUREL", "CHESTNUT", "VALLEY", "SPRUCE", "LOCUST", "SYCAMORE",
    "POPLAR", "ASPEN", "MAGNOLIA", "HARBOR", "ORCHARD", "PROSPECT", "BROAD", "MARKET", "UNION", "CANAL",
];

/// (canonical abbreviation, long form)
pub const STREET_SUFFIXES: &[(&str, &str)] = &[
    ("ST", "STREET"), ("AVE", "AVENUE"), ("RD", "ROAD"), ("DR", "DRIVE"), ("LN", "LANE"),
    ("CT", "COURT"), ("BLVD", "BOULEVARD"), ("PL", "PLACE"), ("TER", "TERRACE"), ("WAY", "WAY"),
];

pub const EMPLOYERS: &[(&str, u64)] = &[
    ("ACME CORP", 900), ("GLOBEX", 700), ("INITECH", 650), ("UMBRELLA HEALTH", 600), ("STARK LOGISTICS", 560),
    ("WAYNE FOODS", 520), ("HOOLI", 500), ("VANDELAY IMPORTS", 450), ("MASSIVE DYNAMIC", 420), ("SOYLENT", 400),
    ("CYBERDYNE", 380), ("TYRELL", 360), ("PIED PIPER", 340), ("WONKA", 320), ("OSCORP", 300),
    ("GRINGOTTS", 280), ("MONARCH BANK", 260), ("NAKATOMI", 240), ("DUNDER MIFFLIN", 230), ("BLUTH CO", 220),
    ("STERLING COOPER", 210), ("PRESTIGE WORLDWIDE", 200), ("CHOTCHKIES", 190), ("KRUSTY KRAB", 180), ("LOS POLLOS", 170),
    ("BIG KAHUNA", 160), ("PAWNEE PARKS", 150), ("GOODMAN LAW", 140), ("SABRE", 130), ("GEKKO", 120),
    ("CITY HOSPITAL", 600), ("STATE UNIVERSITY", 550), ("PUBLIC SCHOOLS", 700), ("COUNTY OFFICE", 400), ("SELF EMPLOYED", 800),
];

pub const EMAIL_DOMAINS: &[&str] = &["MAIL.COM", "EXAMPLE.ORG", "INBOX.NET", "POST.IO", "WEBMAIL.US"];

pub const GENDERS: &[(&str, f64)] = &[("F", 0.51), ("M", 0.49)];

pub const ETHNICITIES: &[(&str, f64)] = &[
    ("WHITE", 0.60),
    ("HISPANIC", 0.18),
    ("BLACK", 0.13),
    ("ASIAN", 0.06),
    ("OTHER", 0.03),
];

/// Canonical given name for a nickname, if the table knows one.
pub fn canonical_given(name: &str) -> Option<&'static str> {
    NICKNAMES.iter().find(|(nick, _)| *nick == name).map(|(_, c)| *c)
}

/// Nicknames whose canonical form is `name`.
pub fn nicknames_of(name: &str) -> impl Iterator<Item = &'static str> + '_ {
    NICKNAMES.iter().filter(move |(_, c)| *c == name).map(|(n, _)| *n)
}

/// Canonical abbreviation for a long or short street suffix.
pub fn street_suffix_abbrev(token: &str) -> Option<&'static str> {
    STREET_SUFFIXES.iter().find(|(a, l)| *a == token || *l == token).map(|(a, _)| *a)
}
